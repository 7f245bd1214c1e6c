#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use cralloc::model::{pu_rate_alone, ChannelState, Modulation, PuProfile, SuProfile, SystemParams};

pub struct Instance {
    pub params: SystemParams,
    pub channel: ChannelState,
    pub pus: Vec<PuProfile>,
    pub sus: Vec<SuProfile>,
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn rayleigh(rng: &mut StdRng, mean_square: f64) -> f64 {
    let u: f64 = rng.gen();
    (-mean_square * (-u).ln_1p()).sqrt()
}

/// Random Rayleigh instance. PUs share the first three quarters of the band
/// in equal contiguous blocks; the rest is unlicensed. Each floor is a random
/// fraction in `floor_frac` of what the PU gets with no SU present.
pub fn random_instance(
    rng: &mut StdRng,
    n: usize,
    m: usize,
    k: usize,
    floor_frac: std::ops::Range<f64>,
) -> Instance {
    let total_power = 1.0;
    let noise = 0.1;
    let params = SystemParams::new(n, m, k, noise, total_power, 1e-3, Modulation::Mqam).unwrap();
    let licensed = if m == 0 { 0 } else { (3 * n / 4).max(m) };
    let block = if m == 0 { 0 } else { licensed / m };
    let mut t = vec![0.0; n];
    for ti in t.iter_mut().take(block * m) {
        *ti = 1.0;
    }
    let mut draw = |mean: f64, len: usize| (0..len).map(|_| rayleigh(rng, mean)).collect::<Vec<_>>();
    let h_pp = draw(1.0, n);
    let h_ss = (0..k).map(|_| draw(1.0, n)).collect();
    let h_ps = (0..k).map(|_| draw(0.1, n)).collect();
    let h_sp = (0..k).map(|_| draw(0.5, n)).collect();
    let channel = ChannelState {
        h_pp,
        h_ss,
        h_ps,
        h_sp,
        t,
    };
    let pus = (0..m)
        .map(|j| {
            let omega: Vec<usize> = (j * block..(j + 1) * block).collect();
            let alpha = rng.gen_range(0.1..0.9);
            let beta = rng.gen_range(0.1..0.9);
            let probe = PuProfile::new(omega.clone(), alpha, beta, 0.0).unwrap();
            let alone = probe.p_on * pu_rate_alone(&channel, &probe, noise);
            let frac = rng.gen_range(floor_frac.clone());
            PuProfile::new(omega, alpha, beta, frac * alone).unwrap()
        })
        .collect();
    let sus = (0..k)
        .map(|_| SuProfile::new(rng.gen_range(0.0..0.5)).unwrap())
        .collect();
    Instance {
        params,
        channel,
        pus,
        sus,
    }
}
