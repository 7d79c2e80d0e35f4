//! Loss values for RPN/detector heads. Evaluation only, no gradients.

use crate::error::{Error, Result};

/// Huber-style smooth L1: quadratic below `beta`, linear above.
pub fn smooth_l1(x: f64, beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::param("beta", format!("{beta} must be positive")));
    }
    let a = x.abs();
    Ok(if a < beta {
        0.5 * x * x / beta
    } else {
        a - 0.5 * beta
    })
}

/// Binary cross-entropy of probability `p` against label `y`.
///
/// `p` must lie strictly inside (0, 1); callers clamp.
pub fn bce(p: f64, y: bool) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::param(
            "p",
            format!("{p} is not strictly inside (0, 1)"),
        ));
    }
    Ok(if y { -p.ln() } else { -(1.0 - p).ln() })
}

/// `cls + lambda * reg`.
pub fn total_loss(cls: f64, reg: f64, lambda: f64) -> f64 {
    cls + lambda * reg
}
