//! Joint subcarrier, power and bit allocation for multi-user OFDM overlay
//! cognitive radio.
//!
//! Secondary users (SUs) share the subcarriers of a licensed primary system and
//! spend a fraction of their transmit power relaying primary-user (PU) traffic.
//! The allocation pipeline is:
//!
//! 1. [`allocator::compute_p_eq`] finds the largest equal power level that keeps
//!    every PU's expected rate above its floor, and
//!    [`allocator::allocate_subcarriers`] hands each subcarrier to the SU with
//!    the best rate at that level.
//! 2. [`power::solve_power`] solves the continuous power allocation by dual
//!    decomposition: a subgradient loop on the power-budget multiplier wraps one
//!    independent subgradient loop per PU rate multiplier, and each subcarrier
//!    power is the root of a stationarity fixed point found by bisection.
//! 3. [`bits::quantize_up`] rounds each subcarrier up to an integer bit load and
//!    [`bits::greedy_bit_removal`] strips the most expensive bits until the power
//!    budget holds again.
//!
//! [`oracle`] holds brute-force references used by the tests, and [`runner`]
//! drives Monte Carlo batches from a TOML scenario file.

pub mod allocator;
pub mod bits;
mod error;
pub mod model;
pub mod oracle;
pub mod power;
pub mod runner;

pub use error::{Error, Result};
