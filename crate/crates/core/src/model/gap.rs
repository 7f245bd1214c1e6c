//! Gaussian tail function, its inverse, and the SNR gap at a target BER.

use std::f64::consts::{PI, SQRT_2};

use super::Modulation;
use crate::{Error, Result};

/// Bracket for the inverse search; `Q(40)` underflows to zero.
const X_MAX: f64 = 40.0;
const MAX_ITERS: usize = 200;

/// Gaussian tail probability `Q(x) = P(Z > x)` for standard normal `Z`.
///
/// Evaluated as `erfc(x / sqrt 2) / 2` with the `libm` complementary error
/// function (sub-ulp accuracy over the whole real line, no cancellation in the
/// upper tail).
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Inverse of [`q_function`] on `(0, 1)`.
///
/// Values above one half are reflected (`Q(-x) = 1 - Q(x)`, and `1 - p` is exact
/// there), so the search always runs in the upper tail, where Newton steps on
/// `ln Q` converge fast. Each Newton iterate is kept inside a shrinking
/// bisection bracket on `[0, 40]`.
pub fn inverse_q(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain("p", p, "(0, 1)"));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    if p > 0.5 {
        return Ok(-upper_tail_inverse(1.0 - p));
    }
    Ok(upper_tail_inverse(p))
}

// Solves Q(x) = p for p in (0, 0.5), so x in (0, X_MAX].
fn upper_tail_inverse(p: f64) -> f64 {
    let target = p.ln();
    let (mut lo, mut hi) = (0.0_f64, X_MAX);
    let mut x = (-2.0 * p.ln()).sqrt().clamp(lo, hi);
    for _ in 0..MAX_ITERS {
        let q = q_function(x);
        if q == p {
            return x;
        }
        if q > p {
            lo = x;
        } else {
            hi = x;
        }
        let pdf = std_normal_pdf(x);
        let mut next = if q > 0.0 && pdf > 0.0 {
            // d ln Q / dx = -pdf / Q
            x + (q.ln() - target) * q / pdf
        } else {
            f64::NAN
        };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.max(1.0) || hi - lo <= f64::EPSILON * hi {
            return next;
        }
        x = next;
    }
    x
}

/// SNR gap for rectangular M-QAM: `[Q^{-1}(p_e / 4)]^2 / 3`.
pub fn snr_gap_mqam(p_e: f64) -> Result<f64> {
    if !(p_e > 0.0 && p_e < 1.0) {
        return Err(Error::domain("p_e", p_e, "(0, 1)"));
    }
    let x = inverse_q(p_e / 4.0)?;
    Ok(x * x / 3.0)
}

/// SNR gap for MPSK: `[Q^{-1}(p_e / 2) / (pi sqrt 2)]^2`.
pub fn snr_gap_mpsk(p_e: f64) -> Result<f64> {
    if !(p_e > 0.0 && p_e < 1.0) {
        return Err(Error::domain("p_e", p_e, "(0, 1)"));
    }
    let x = inverse_q(p_e / 2.0)? / (PI * SQRT_2);
    Ok(x * x)
}

pub fn snr_gap(modulation: Modulation, p_e: f64) -> Result<f64> {
    match modulation {
        Modulation::Mqam => snr_gap_mqam(p_e),
        Modulation::Mpsk => snr_gap_mpsk(p_e),
    }
}
