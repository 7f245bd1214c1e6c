use crate::{Error, Result};

/// Stationary distribution `(p_off, p_on)` of the two-state PU activity chain.
///
/// `alpha` is Pr(OFF next | ON now) and `beta` is Pr(ON next | OFF now), so the
/// transition matrix over states (ON, OFF) is `[[1 - alpha, alpha], [beta, 1 - beta]]`
/// and its left fixed point puts mass `beta / (alpha + beta)` on ON.
pub fn steady_state(alpha: f64, beta: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::domain("alpha", alpha, "[0, 1]"));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::domain("beta", beta, "[0, 1]"));
    }
    let total = alpha + beta;
    if total == 0.0 {
        return Err(Error::DegenerateChain);
    }
    let p_on = beta / total;
    Ok((1.0 - p_on, p_on))
}
