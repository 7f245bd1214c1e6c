//! Seeded channel generation.
//!
//! Every draw is addressed by `(seed, trial, link, index)`: the ChaCha key is
//! built from the seed and trial, the stream selects the link type and the
//! word position selects the entry. A trial therefore sees the same channel no
//! matter which thread runs it, how many trials precede it or which sweep
//! value is applied.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{Fading, ScenarioConfig};
use crate::model::{expected_interference, pu_of_subcarrier, ChannelState, Problem};
use crate::Result;

/// Link types, used as the ChaCha stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Link {
    /// PU transmitter to PU receiver.
    Pp = 0,
    /// SU transmitter to SU receiver.
    Ss = 1,
    /// PU transmitter to SU receiver.
    Ps = 2,
    /// SU transmitter to PU receiver.
    Sp = 3,
}

/// A generated instance plus the mean interference each SU sees per subcarrier.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub problem: Problem,
    /// `J[k][i]`; zero on subcarriers no PU is licensed on.
    pub interference: Vec<Vec<f64>>,
}

fn trial_rng(seed: u64, trial: u64, link: Link) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&trial.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(link as u64);
    rng
}

/// The uniform variate in `[0, 1)` for one channel entry.
pub fn uniform_draw(seed: u64, trial: u64, link: Link, index: u64) -> f64 {
    let mut rng = trial_rng(seed, trial, link);
    rng.set_word_pos(2 * u128::from(index));
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Rayleigh magnitude with `E|H|^2 = mean_square`, by inverting the
/// exponential CDF of `|H|^2`.
pub fn rayleigh_magnitude(mean_square: f64, u: f64) -> f64 {
    (-mean_square * (-u).ln_1p()).sqrt()
}

fn magnitudes(config: &ScenarioConfig, trial: u64, link: Link, mean_square: f64, count: usize) -> Vec<f64> {
    match config.fading.distribution {
        Fading::Fixed => vec![mean_square.sqrt(); count],
        Fading::Rayleigh => {
            let mut rng = trial_rng(config.seed, trial, link);
            (0..count)
                .map(|index| {
                    rng.set_word_pos(2 * index as u128);
                    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                    rayleigh_magnitude(mean_square, u)
                })
                .collect()
        }
    }
}

fn per_su(flat: Vec<f64>, n: usize) -> Vec<Vec<f64>> {
    flat.chunks(n.max(1)).map(<[f64]>::to_vec).collect()
}

/// Draws the channel for `trial` and builds the problem at `sweep_value`.
pub fn generate_scenario(config: &ScenarioConfig, trial: u64, sweep_value: Option<f64>) -> Result<Scenario> {
    let params = config.system_params(sweep_value)?;
    let pus = config.pu_profiles(sweep_value)?;
    let n = params.n_subcarriers;
    let k = params.n_sus;
    let g = config.fading.mean_gain;

    let pu_map = pu_of_subcarrier(&pus, n);
    let t = pu_map
        .iter()
        .map(|owner| if owner.is_some() { config.pu_power_per_subcarrier } else { 0.0 })
        .collect();
    let channel = ChannelState {
        h_pp: magnitudes(config, trial, Link::Pp, g.pp, n),
        h_ss: per_su(magnitudes(config, trial, Link::Ss, g.ss, k * n), n),
        h_ps: per_su(magnitudes(config, trial, Link::Ps, g.ps, k * n), n),
        h_sp: per_su(magnitudes(config, trial, Link::Sp, g.sp, k * n), n),
        t,
    };
    let interference = (0..k)
        .map(|su| {
            (0..n)
                .map(|i| {
                    pu_map[i].map_or(0.0, |j| {
                        expected_interference(pus[j].p_on, channel.h_ps[su][i], channel.t[i])
                    })
                })
                .collect()
        })
        .collect();
    let problem = Problem::new(params, channel, pus, config.sus.clone())?;
    Ok(Scenario { problem, interference })
}
