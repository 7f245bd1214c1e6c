//! Domain types and closed-form physical-layer math.
//!
//! Gains are stored as magnitudes `|H|`; every formula only ever uses the
//! magnitude. Rates are bits/s/Hz per OFDM symbol, powers are linear watts.

mod gap;
mod markov;
mod rates;

pub use gap::{inverse_q, q_function, snr_gap, snr_gap_mpsk, snr_gap_mqam};
pub use markov::steady_state;
pub use rates::{
    bits_continuous, effective_gain, effective_gains, expected_interference, expected_pu_rate,
    pu_rate_alone, pu_rate_with_relay, RelayLink,
};

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    Mqam,
    Mpsk,
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modulation::Mqam => f.write_str("mqam"),
            Modulation::Mpsk => f.write_str("mpsk"),
        }
    }
}

impl FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mqam" | "qam" => Ok(Modulation::Mqam),
            "mpsk" | "psk" => Ok(Modulation::Mpsk),
            other => Err(Error::InvalidInput(format!(
                "unknown modulation '{other}' (expected mqam or mpsk)"
            ))),
        }
    }
}

/// System-wide constants shared by every subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    pub n_subcarriers: usize,
    pub n_pus: usize,
    pub n_sus: usize,
    /// AWGN power per subcarrier, watts.
    pub noise_power: f64,
    /// SU transmit power budget, watts.
    pub total_power: f64,
    pub target_ber: f64,
    pub modulation: Modulation,
    /// Linear SNR gap derived from `target_ber` and `modulation`.
    pub snr_gap: f64,
}

impl SystemParams {
    pub fn new(
        n_subcarriers: usize,
        n_pus: usize,
        n_sus: usize,
        noise_power: f64,
        total_power: f64,
        target_ber: f64,
        modulation: Modulation,
    ) -> Result<Self> {
        if n_pus == 0 || n_sus == 0 || n_subcarriers < n_pus {
            return Err(Error::InvalidInput(format!(
                "need N >= M >= 1 and K >= 1, got N = {n_subcarriers}, M = {n_pus}, K = {n_sus}"
            )));
        }
        if !(noise_power > 0.0 && noise_power.is_finite()) {
            return Err(Error::domain("noise_power", noise_power, "> 0"));
        }
        if !(total_power > 0.0 && total_power.is_finite()) {
            return Err(Error::domain("total_power", total_power, "> 0"));
        }
        if !(target_ber > 0.0 && target_ber < 0.5) {
            return Err(Error::domain("target_ber", target_ber, "(0, 0.5)"));
        }
        let snr_gap = snr_gap(modulation, target_ber)?;
        if snr_gap < 1.0 {
            return Err(Error::InvalidInput(format!(
                "{modulation} SNR gap at BER {target_ber} is {snr_gap:.6} < 1; \
                 choose a lower target BER"
            )));
        }
        Ok(Self {
            n_subcarriers,
            n_pus,
            n_sus,
            noise_power,
            total_power,
            target_ber,
            modulation,
            snr_gap,
        })
    }

    /// Same system with a different power budget.
    pub fn with_total_power(&self, total_power: f64) -> Result<Self> {
        Self::new(
            self.n_subcarriers,
            self.n_pus,
            self.n_sus,
            self.noise_power,
            total_power,
            self.target_ber,
            self.modulation,
        )
    }
}

/// Per-subcarrier gain magnitudes and PU transmit powers.
///
/// `h_ss`, `h_ps` and `h_sp` are indexed `[su][subcarrier]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    pub h_pp: Vec<f64>,
    pub h_ss: Vec<Vec<f64>>,
    pub h_ps: Vec<Vec<f64>>,
    pub h_sp: Vec<Vec<f64>>,
    pub t: Vec<f64>,
}

impl ChannelState {
    /// Every link equal to `gain` and every PU power equal to `t`.
    pub fn uniform(n_subcarriers: usize, n_sus: usize, gain: f64, t: f64) -> Self {
        let row = vec![gain; n_subcarriers];
        Self {
            h_pp: row.clone(),
            h_ss: vec![row.clone(); n_sus],
            h_ps: vec![row.clone(); n_sus],
            h_sp: vec![row; n_sus],
            t: vec![t; n_subcarriers],
        }
    }

    pub fn validate(&self, params: &SystemParams) -> Result<()> {
        let n = params.n_subcarriers;
        let k = params.n_sus;
        check_vec("h_pp", &self.h_pp, n)?;
        check_vec("t", &self.t, n)?;
        for (name, m) in [("h_ss", &self.h_ss), ("h_ps", &self.h_ps), ("h_sp", &self.h_sp)] {
            if m.len() != k {
                return Err(Error::InvalidInput(format!(
                    "{name} has {} rows, expected K = {k}",
                    m.len()
                )));
            }
            for row in m {
                check_vec(name, row, n)?;
            }
        }
        Ok(())
    }
}

fn check_vec(name: &str, v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::InvalidInput(format!(
            "{name} has length {}, expected N = {n}",
            v.len()
        )));
    }
    if let Some(x) = v.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(Error::InvalidInput(format!(
            "{name} contains {x}; magnitudes and powers must be finite and >= 0"
        )));
    }
    Ok(())
}

/// One primary user: its licensed subcarriers, ON/OFF activity and rate floor.
#[derive(Debug, Clone, PartialEq)]
pub struct PuProfile {
    /// Sorted subcarrier indices licensed to this PU.
    pub omega: Vec<usize>,
    /// Pr(OFF next | ON now).
    pub alpha: f64,
    /// Pr(ON next | OFF now).
    pub beta: f64,
    pub p_off: f64,
    pub p_on: f64,
    /// Minimum expected rate, bits/s/Hz summed over `omega`.
    pub rate_floor: f64,
}

impl PuProfile {
    pub fn new(omega: Vec<usize>, alpha: f64, beta: f64, rate_floor: f64) -> Result<Self> {
        let (p_off, p_on) = steady_state(alpha, beta)?;
        if !(rate_floor >= 0.0 && rate_floor.is_finite()) {
            return Err(Error::domain("rate_floor", rate_floor, ">= 0, finite"));
        }
        let mut omega = omega;
        omega.sort_unstable();
        omega.dedup();
        Ok(Self {
            omega,
            alpha,
            beta,
            p_off,
            p_on,
            rate_floor,
        })
    }
}

/// Checks that the PU subcarrier sets are nonempty, in range and pairwise disjoint.
pub fn validate_pus(pus: &[PuProfile], n_subcarriers: usize) -> Result<()> {
    let mut seen = BTreeSet::new();
    for (j, pu) in pus.iter().enumerate() {
        if pu.omega.is_empty() {
            return Err(Error::InvalidInput(format!("PU {j} has no subcarriers")));
        }
        for &i in &pu.omega {
            if i >= n_subcarriers {
                return Err(Error::InvalidInput(format!(
                    "PU {j} references subcarrier {i}, but N = {n_subcarriers}"
                )));
            }
            if !seen.insert(i) {
                return Err(Error::InvalidInput(format!(
                    "subcarrier {i} is licensed to more than one PU"
                )));
            }
        }
    }
    Ok(())
}

/// Maps each subcarrier to the PU licensed on it, if any.
pub fn pu_of_subcarrier(pus: &[PuProfile], n_subcarriers: usize) -> Vec<Option<usize>> {
    let mut map = vec![None; n_subcarriers];
    for (j, pu) in pus.iter().enumerate() {
        for &i in &pu.omega {
            if i < n_subcarriers {
                map[i] = Some(j);
            }
        }
    }
    map
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuProfile {
    /// Share of the SU's per-subcarrier power spent relaying PU traffic, in [0, 1).
    pub relay_fraction: f64,
}

impl SuProfile {
    pub fn new(relay_fraction: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&relay_fraction) {
            return Err(Error::domain("relay_fraction", relay_fraction, "[0, 1)"));
        }
        Ok(Self { relay_fraction })
    }
}

/// Subcarrier ownership: which SU transmits on each subcarrier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    /// `u[k]` is the sorted set of subcarriers owned by SU `k`.
    pub u: Vec<Vec<usize>>,
    /// `psi[j]` lists the SUs owning at least one subcarrier of PU `j`.
    pub psi: Vec<Vec<usize>>,
    owner: Vec<usize>,
}

impl Assignment {
    /// Builds the assignment from a per-subcarrier owner list.
    pub fn from_owners(owner: Vec<usize>, n_sus: usize, pus: &[PuProfile]) -> Result<Self> {
        let mut u = vec![Vec::new(); n_sus];
        for (i, &k) in owner.iter().enumerate() {
            if k >= n_sus {
                return Err(Error::InvalidInput(format!(
                    "subcarrier {i} assigned to SU {k}, but K = {n_sus}"
                )));
            }
            u[k].push(i);
        }
        let psi = pus
            .iter()
            .map(|pu| {
                let owners: BTreeSet<usize> = pu
                    .omega
                    .iter()
                    .filter_map(|&i| owner.get(i).copied())
                    .collect();
                owners.into_iter().collect()
            })
            .collect();
        Ok(Self { u, psi, owner })
    }

    pub fn owner(&self, subcarrier: usize) -> usize {
        self.owner[subcarrier]
    }

    pub fn owners(&self) -> &[usize] {
        &self.owner
    }

    pub fn n_subcarriers(&self) -> usize {
        self.owner.len()
    }
}

/// A complete allocation: ownership, continuous power, integer bits and the
/// dual multipliers that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub assignment: Assignment,
    pub power: Vec<f64>,
    pub bits: Vec<u32>,
    pub lambda: f64,
    pub mu: Vec<f64>,
}

/// Everything needed to run the allocation pipeline on one channel realisation.
#[derive(Debug, Clone)]
pub struct Problem {
    pub params: SystemParams,
    pub channel: ChannelState,
    pub pus: Vec<PuProfile>,
    pub sus: Vec<SuProfile>,
}

impl Problem {
    pub fn new(
        params: SystemParams,
        channel: ChannelState,
        pus: Vec<PuProfile>,
        sus: Vec<SuProfile>,
    ) -> Result<Self> {
        if pus.len() != params.n_pus {
            return Err(Error::InvalidInput(format!(
                "{} PU profiles for M = {}",
                pus.len(),
                params.n_pus
            )));
        }
        if sus.len() != params.n_sus {
            return Err(Error::InvalidInput(format!(
                "{} SU profiles for K = {}",
                sus.len(),
                params.n_sus
            )));
        }
        channel.validate(&params)?;
        validate_pus(&pus, params.n_subcarriers)?;
        Ok(Self {
            params,
            channel,
            pus,
            sus,
        })
    }

    /// Effective gains `s[k][i]` for every SU and subcarrier.
    pub fn effective_gains(&self) -> Vec<Vec<f64>> {
        effective_gains(&self.params, &self.channel, &self.pus, &self.sus)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pu(omega: Vec<usize>) -> PuProfile {
        PuProfile::new(omega, 0.5, 0.5, 0.0).unwrap()
    }

    #[test]
    fn system_params_rejects_bad_counts() {
        assert!(SystemParams::new(2, 3, 1, 1.0, 1.0, 1e-3, Modulation::Mqam).is_err());
        assert!(SystemParams::new(4, 1, 0, 1.0, 1.0, 1e-3, Modulation::Mqam).is_err());
        assert!(SystemParams::new(4, 1, 1, 0.0, 1.0, 1e-3, Modulation::Mqam).is_err());
        assert!(SystemParams::new(4, 1, 1, 1.0, -1.0, 1e-3, Modulation::Mqam).is_err());
    }

    #[test]
    fn system_params_rejects_gap_below_one() {
        // MPSK gap at BER 1e-3 is about 0.55.
        let err = SystemParams::new(4, 1, 1, 1.0, 1.0, 1e-3, Modulation::Mpsk).unwrap_err();
        assert!(err.to_string().contains("SNR gap"));
        let ok = SystemParams::new(4, 1, 1, 1.0, 1.0, 1e-6, Modulation::Mpsk).unwrap();
        assert!(ok.snr_gap >= 1.0);
    }

    #[test]
    fn overlapping_pus_are_rejected() {
        let pus = vec![pu(vec![0, 1]), pu(vec![1, 2])];
        assert!(validate_pus(&pus, 4).is_err());
        let pus = vec![pu(vec![0, 1]), pu(vec![5])];
        assert!(validate_pus(&pus, 4).is_err());
        let pus = vec![pu(vec![0, 1]), pu(vec![2, 3])];
        validate_pus(&pus, 4).unwrap();
    }

    #[test]
    fn assignment_recomputes_psi() {
        let pus = vec![pu(vec![0, 1]), pu(vec![2, 3])];
        let a = Assignment::from_owners(vec![0, 0, 1, 0], 2, &pus).unwrap();
        assert_eq!(a.u, vec![vec![0, 1, 3], vec![2]]);
        assert_eq!(a.psi, vec![vec![0], vec![0, 1]]);
        assert!(Assignment::from_owners(vec![0, 2], 2, &pus).is_err());
    }

    #[test]
    fn relay_fraction_must_be_below_one() {
        assert!(SuProfile::new(1.0).is_err());
        assert!(SuProfile::new(-0.1).is_err());
        SuProfile::new(0.0).unwrap();
    }

    #[test]
    fn channel_dimensions_checked() {
        let params = SystemParams::new(4, 1, 2, 1.0, 1.0, 1e-3, Modulation::Mqam).unwrap();
        let mut ch = ChannelState::uniform(4, 2, 1.0, 1.0);
        ch.validate(&params).unwrap();
        ch.h_sp[1].pop();
        assert!(ch.validate(&params).is_err());
        let mut ch = ChannelState::uniform(4, 2, 1.0, 1.0);
        ch.t[0] = f64::NAN;
        assert!(ch.validate(&params).is_err());
    }
}
