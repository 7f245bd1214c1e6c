use super::{pu_of_subcarrier, Assignment, ChannelState, PuProfile, SuProfile, SystemParams};

/// Mean interference a PU injects into an SU receiver: `p_on * |H_ps|^2 * T`.
pub fn expected_interference(p_on: f64, h_ps: f64, t: f64) -> f64 {
    p_on * h_ps * h_ps * t
}

/// Usable SNR per watt of SU power, `|H_ss|^2 (1 - alpha_k) / (gap (N_o + J))`.
pub fn effective_gain(h_ss: f64, relay_fraction: f64, gap: f64, noise: f64, j_bar: f64) -> f64 {
    h_ss * h_ss * (1.0 - relay_fraction) / (gap * (noise + j_bar))
}

/// `s[k][i]` for every SU `k` and subcarrier `i`.
///
/// Only the PU licensed on subcarrier `i` interferes there; subcarriers outside
/// every PU set see noise alone.
pub fn effective_gains(
    params: &SystemParams,
    channel: &ChannelState,
    pus: &[PuProfile],
    sus: &[SuProfile],
) -> Vec<Vec<f64>> {
    let pu_map = pu_of_subcarrier(pus, params.n_subcarriers);
    sus.iter()
        .enumerate()
        .map(|(k, su)| {
            (0..params.n_subcarriers)
                .map(|i| {
                    let j_bar = pu_map[i].map_or(0.0, |j| {
                        expected_interference(pus[j].p_on, channel.h_ps[k][i], channel.t[i])
                    });
                    effective_gain(
                        channel.h_ss[k][i],
                        su.relay_fraction,
                        params.snr_gap,
                        params.noise_power,
                        j_bar,
                    )
                })
                .collect()
        })
        .collect()
}

/// Continuous bit load `log2(1 + s p)`.
pub fn bits_continuous(s: f64, p: f64) -> f64 {
    (s * p).ln_1p() / std::f64::consts::LN_2
}

/// PU rate on its own subcarriers with no SU present.
pub fn pu_rate_alone(channel: &ChannelState, pu: &PuProfile, noise: f64) -> f64 {
    pu.omega
        .iter()
        .map(|&i| {
            let h = channel.h_pp[i];
            (h * h * channel.t[i] / noise).ln_1p() / std::f64::consts::LN_2
        })
        .sum()
}

/// The PU link on one subcarrier as seen through the SU that owns it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayLink {
    pub h_pp: f64,
    pub h_sp: f64,
    pub t: f64,
    pub relay_fraction: f64,
    pub noise: f64,
}

impl RelayLink {
    pub fn new(channel: &ChannelState, sus: &[SuProfile], su: usize, subcarrier: usize, noise: f64) -> Self {
        Self {
            h_pp: channel.h_pp[subcarrier],
            h_sp: channel.h_sp[su][subcarrier],
            t: channel.t[subcarrier],
            relay_fraction: sus[su].relay_fraction,
            noise,
        }
    }

    /// PU rate on this subcarrier when the SU transmits `p` watts.
    ///
    /// The relayed amplitude adds coherently to the direct PU signal while the
    /// non-relayed share of SU power is interference.
    pub fn rate(&self, p: f64) -> f64 {
        let a2 = self.h_pp * self.h_pp * self.t;
        let b2 = self.h_sp * self.h_sp;
        // (|H_pp| sqrt(T) + |H_sp| sqrt(alpha p))^2, expanded so p = 0 reproduces
        // the no-SU term bit for bit.
        let cross = 2.0 * self.h_pp * self.t.sqrt() * self.h_sp * (self.relay_fraction * p).sqrt();
        let signal = a2 + cross + b2 * self.relay_fraction * p;
        let interference = self.noise + b2 * (1.0 - self.relay_fraction) * p;
        (signal / interference).ln_1p() / std::f64::consts::LN_2
    }
}

/// PU `j` rate with SU relaying under the given power vector.
///
/// Each licensed subcarrier contributes exactly once, through the SU that owns it.
pub fn pu_rate_with_relay(
    channel: &ChannelState,
    pu: &PuProfile,
    sus: &[SuProfile],
    assignment: &Assignment,
    power: &[f64],
    noise: f64,
) -> f64 {
    pu.omega
        .iter()
        .map(|&i| RelayLink::new(channel, sus, assignment.owner(i), i, noise).rate(power[i]))
        .sum()
}

/// Expected PU rate: zero while OFF, `r_s` while ON.
pub fn expected_pu_rate(p_on: f64, r_s: f64) -> f64 {
    p_on * r_s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Modulation;
    use proptest::prelude::*;

    fn single(h_pp: f64, t: f64) -> ChannelState {
        let mut ch = ChannelState::uniform(1, 1, 1.0, t);
        ch.h_pp[0] = h_pp;
        ch
    }

    #[test]
    fn interference_examples() {
        assert!((expected_interference(0.4, 0.5_f64.sqrt(), 2.0) - 0.4).abs() < 1e-15);
        assert_eq!(expected_interference(0.0, 3.0, 2.0), 0.0);
        assert_eq!(expected_interference(1.0, 1.0, 1.0), 1.0);
    }

    #[test]
    fn effective_gain_examples() {
        assert_eq!(effective_gain(1.0, 0.0, 1.0, 1.0, 0.0), 1.0);
        assert_eq!(effective_gain(1.0, 0.5, 1.0, 1.0, 0.0), 0.5);
        let s1 = effective_gain(0.7, 0.2, 3.0, 0.1, 0.05);
        let s2 = effective_gain(0.7, 0.2, 3.0, 0.2, 0.1);
        assert!((s1 - 2.0 * s2).abs() < 1e-14);
    }

    #[test]
    fn bits_continuous_examples() {
        assert_eq!(bits_continuous(2.0, 0.0), 0.0);
        assert!((bits_continuous(1.0, 1.0) - 1.0).abs() < 1e-15);
        assert!((bits_continuous(7.0, 1.0) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn pu_rate_alone_examples() {
        let pu = PuProfile::new(vec![0], 0.5, 0.5, 0.0).unwrap();
        assert!((pu_rate_alone(&single(1.0, 1.0), &pu, 1.0) - 1.0).abs() < 1e-15);
        assert!((pu_rate_alone(&single(3.0_f64.sqrt(), 1.0), &pu, 1.0) - 2.0).abs() < 1e-15);
        assert_eq!(pu_rate_alone(&single(1.0, 0.0), &pu, 1.0), 0.0);
    }

    #[test]
    fn relay_rate_examples() {
        let pus = vec![PuProfile::new(vec![0], 0.5, 0.5, 0.0).unwrap()];
        let ch = single(0.8, 1.3);
        let sus = [SuProfile::new(0.3).unwrap()];
        let a = Assignment::from_owners(vec![0], 1, &pus).unwrap();
        assert_eq!(
            pu_rate_with_relay(&ch, &pus[0], &sus, &a, &[0.0], 0.5),
            pu_rate_alone(&ch, &pus[0], 0.5)
        );

        // Pure relay, no interference term: log2(1 + 3) = 2. relay_fraction = 1
        // is outside SuProfile's range, so drive the link directly.
        let link = RelayLink { h_pp: 1.0, h_sp: 3.0_f64.sqrt(), t: 0.0, relay_fraction: 1.0, noise: 1.0 };
        assert!((link.rate(1.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn relay_rate_matches_direct_evaluation() {
        // Literal (|H_pp| sqrt T + |H_sp| sqrt(alpha P))^2 / (N_o + |H_sp|^2 (1 - alpha) P).
        let direct = |h_pp: f64, t: f64, h_sp: f64, a: f64, p: f64, n0: f64| {
            let num = (h_pp * t.sqrt() + h_sp * (a * p).sqrt()).powi(2);
            (1.0 + num / (n0 + h_sp * h_sp * (1.0 - a) * p)).log2()
        };
        let cases = [(0.9, 1.2, 0.3, 0.4, 0.7, 0.1), (1.5, 0.2, 0.05, 0.0, 3.0, 1.0), (0.1, 2.0, 1.1, 0.9, 0.01, 0.3)];
        for (h_pp, t, h_sp, a, p, n0) in cases {
            let link = RelayLink { h_pp, h_sp, t, relay_fraction: a, noise: n0 };
            assert!((link.rate(p) - direct(h_pp, t, h_sp, a, p, n0)).abs() < 1e-13);
        }
    }

    #[test]
    fn pu_rate_uses_owner_of_each_subcarrier() {
        let pus = vec![PuProfile::new(vec![0, 1], 0.5, 0.5, 0.0).unwrap()];
        let mut ch = ChannelState::uniform(2, 2, 1.0, 1.0);
        ch.h_sp[1][1] = 0.0;
        let sus = [SuProfile::new(0.0).unwrap(), SuProfile::new(0.0).unwrap()];
        let a = Assignment::from_owners(vec![0, 1], 2, &pus).unwrap();
        // Subcarrier 0: interference from SU 0; subcarrier 1: SU 1 has no cross link.
        let r = pu_rate_with_relay(&ch, &pus[0], &sus, &a, &[1.0, 1.0], 1.0);
        let expect = (1.0f64 + 1.0 / 2.0).log2() + 1.0;
        assert!((r - expect).abs() < 1e-14);
    }

    #[test]
    fn expected_rate_examples() {
        assert_eq!(expected_pu_rate(0.0, 5.0), 0.0);
        assert_eq!(expected_pu_rate(1.0, 5.0), 5.0);
        assert_eq!(expected_pu_rate(0.5, 4.0), 2.0);
    }

    #[test]
    fn effective_gains_ignore_interference_off_license() {
        let params = SystemParams::new(3, 1, 1, 0.5, 1.0, 1e-3, Modulation::Mqam).unwrap();
        let ch = ChannelState::uniform(3, 1, 1.0, 2.0);
        let pus = vec![PuProfile::new(vec![0], 0.5, 0.5, 0.0).unwrap()];
        let sus = [SuProfile::new(0.0).unwrap()];
        let s = effective_gains(&params, &ch, &pus, &sus);
        let g = params.snr_gap;
        assert!((s[0][0] - 1.0 / (g * (0.5 + 0.5 * 2.0))).abs() < 1e-15);
        assert!((s[0][2] - 1.0 / (g * 0.5)).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn bits_increasing_and_concave(s in 0.01f64..100.0, p in 0.001f64..10.0) {
            let h = 1e-3 * p;
            let (b0, b1, b2) = (bits_continuous(s, p - h), bits_continuous(s, p), bits_continuous(s, p + h));
            prop_assert!(b2 > b1 && b1 > b0);
            prop_assert!(b2 - 2.0 * b1 + b0 <= 1e-12);
        }

        #[test]
        fn relay_rate_continuous_at_zero(h_pp in 0.0f64..3.0, h_sp in 0.0f64..3.0, t in 0.0f64..3.0, a in 0.0f64..0.99) {
            let link = RelayLink { h_pp, h_sp, t, relay_fraction: a, noise: 0.5 };
            let r0 = link.rate(0.0);
            prop_assert!((link.rate(1e-18) - r0).abs() < 1e-6);
        }
    }
}
