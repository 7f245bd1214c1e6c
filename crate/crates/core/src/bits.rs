//! Integer bit loading and greedy bit removal.

use crate::{Error, Result};

/// Loads within this relative distance of an integer are snapped to it before
/// rounding up, so `s * P = 3` gives 2 bits rather than 3.
pub const CEIL_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct BitAllocation {
    pub bits: Vec<u32>,
    /// Power needed for `bits` on each subcarrier.
    pub power: Vec<f64>,
    /// Bits stripped by [`greedy_bit_removal`].
    pub removed: u32,
}

impl BitAllocation {
    pub fn total_bits(&self) -> u64 {
        self.bits.iter().map(|&b| u64::from(b)).sum()
    }

    pub fn total_power(&self) -> f64 {
        self.power.iter().sum()
    }
}

/// Power that carries `b` bits on a subcarrier of effective gain `s`: `(2^b - 1) / s`.
pub fn power_for_bits(b: u32, s: f64) -> Result<f64> {
    if b == 0 {
        return Ok(0.0);
    }
    if !(s > 0.0) {
        return Err(Error::InfeasibleBit { bits: b });
    }
    Ok((2f64.powi(b as i32) - 1.0) / s)
}

/// Power saved by dropping the `b`-th bit, `2^(b-1) / s`.
///
/// Computed as the difference of the two loads so that the running power total
/// in [`greedy_bit_removal`] matches a recomputation from the bits exactly.
pub fn delta_power(b: u32, s: f64) -> Result<f64> {
    if b == 0 {
        return Err(Error::NoBitToRemove);
    }
    Ok(power_for_bits(b, s)? - power_for_bits(b - 1, s)?)
}

/// Rounds each continuous load `log2(1 + s P)` up to an integer and recomputes
/// the matching power.
pub fn quantize_up(power: &[f64], gains: &[f64]) -> BitAllocation {
    let bits: Vec<u32> = power
        .iter()
        .zip(gains)
        .map(|(&p, &s)| {
            if !(p > 0.0 && s > 0.0) {
                return 0;
            }
            let b = (s * p).ln_1p() / std::f64::consts::LN_2;
            let nearest = b.round();
            if (b - nearest).abs() <= CEIL_GUARD * nearest.max(1.0) {
                nearest as u32
            } else {
                b.ceil() as u32
            }
        })
        .collect();
    let power = bits
        .iter()
        .zip(gains)
        .map(|(&b, &s)| power_for_bits(b, s).unwrap_or(0.0))
        .collect();
    BitAllocation {
        bits,
        power,
        removed: 0,
    }
}

/// Removes the bit whose loss saves the most power, ties to the lowest
/// subcarrier index. Returns the subcarrier touched, or `None` when every
/// subcarrier is empty.
pub fn remove_top_bit(alloc: &mut BitAllocation, gains: &[f64]) -> Option<usize> {
    let mut pick: Option<(usize, f64)> = None;
    for (i, (&b, &s)) in alloc.bits.iter().zip(gains).enumerate() {
        let Ok(saved) = delta_power(b, s) else { continue };
        if pick.map_or(true, |(_, best)| saved > best) {
            pick = Some((i, saved));
        }
    }
    let (i, _) = pick?;
    alloc.bits[i] -= 1;
    alloc.power[i] = power_for_bits(alloc.bits[i], gains[i]).unwrap_or(0.0);
    alloc.removed += 1;
    Some(i)
}

/// Strips bits with [`remove_top_bit`] until the total power fits in `p_t`.
///
/// Only the power budget is enforced; rate-floor checks happen afterwards.
pub fn greedy_bit_removal(mut alloc: BitAllocation, gains: &[f64], p_t: f64) -> BitAllocation {
    while alloc.total_power() > p_t {
        if remove_top_bit(&mut alloc, gains).is_none() {
            break;
        }
    }
    alloc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_for_bits_examples() {
        assert_eq!(power_for_bits(0, 3.0).unwrap(), 0.0);
        assert_eq!(power_for_bits(1, 1.0).unwrap(), 1.0);
        assert_eq!(power_for_bits(3, 2.0).unwrap(), 3.5);
        assert!(matches!(power_for_bits(2, 0.0), Err(Error::InfeasibleBit { bits: 2 })));
        assert_eq!(power_for_bits(0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn delta_power_examples() {
        assert_eq!(delta_power(1, 1.0).unwrap(), 1.0);
        assert_eq!(delta_power(3, 1.0).unwrap(), 4.0);
        assert_eq!(delta_power(3, 2.0).unwrap(), 2.0);
        assert!(matches!(delta_power(0, 1.0), Err(Error::NoBitToRemove)));
    }

    #[test]
    fn delta_power_is_the_closed_form() {
        for s in [0.1, 0.3, 1.0, 7.0, 10.0] {
            for b in 1..=20 {
                let closed = 2f64.powi(b as i32 - 1) / s;
                let got = delta_power(b, s).unwrap();
                assert!((got - closed).abs() <= 4.0 * f64::EPSILON * closed, "b={b} s={s}");
            }
        }
    }

    #[test]
    fn quantize_examples() {
        let q = quantize_up(&[3.0, 4.0, 0.0], &[1.0, 1.0, 1.0]);
        assert_eq!(q.bits, vec![2, 3, 0]);
        assert_eq!(q.power, vec![3.0, 7.0, 0.0]);
        assert_eq!(q.removed, 0);
    }

    #[test]
    fn quantize_guard_snaps_noisy_integers() {
        // s * P lands a hair above 2^3 - 1 because 0.7 is not representable.
        let s = 0.7;
        let p = 7.0 / s;
        assert_eq!(quantize_up(&[p], &[s]).bits, vec![3]);
        assert_eq!(quantize_up(&[p * (1.0 + 1e-6)], &[s]).bits, vec![4]);
    }

    #[test]
    fn removal_not_needed() {
        let q = quantize_up(&[1.0, 3.0], &[1.0, 1.0]);
        let out = greedy_bit_removal(q.clone(), &[1.0, 1.0], 10.0);
        assert_eq!(out, q);
    }

    #[test]
    fn removal_worked_example() {
        // b = (3, 2), s = (1, 1): P = (7, 3) = 10 > 8. Top bits cost 4 and 2,
        // so one bit leaves subcarrier 0 and the total drops to 6.
        let alloc = BitAllocation {
            bits: vec![3, 2],
            power: vec![7.0, 3.0],
            removed: 0,
        };
        let out = greedy_bit_removal(alloc, &[1.0, 1.0], 8.0);
        assert_eq!(out.bits, vec![2, 2]);
        assert_eq!(out.power, vec![3.0, 3.0]);
        assert_eq!(out.removed, 1);
    }

    #[test]
    fn removal_can_empty_everything() {
        let q = quantize_up(&[5.0, 5.0], &[1.0, 2.0]);
        let out = greedy_bit_removal(q, &[1.0, 2.0], 0.0);
        assert_eq!(out.bits, vec![0, 0]);
        assert_eq!(out.total_power(), 0.0);
    }
}
