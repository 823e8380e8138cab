//! Tolerances for finite-difference residuals.
//!
//! A residual built from `depth` nested difference levels carries a
//! truncation error `O(h_depth^p)` and a round-off error
//! `O(eps / (h_1 ... h_depth))`. Both terms are multiplied by the curvature
//! scale of the model and by constants calibrated on the round 4-sphere.

use crate::fd::DerivativePlan;

/// Safety factor on the truncation term.
pub const TRUNCATION_FACTOR: f64 = 1.0e3;
/// Safety factor on the round-off term.
pub const ROUNDOFF_FACTOR: f64 = 1.0e3;
/// Floor for residuals that involve no difference quotient.
pub const ALGEBRAIC_FLOOR: f64 = 1.0e-11;

pub fn tolerance(plan: &DerivativePlan, depth: usize, scale: f64) -> f64 {
    let scale = scale.max(1.0);
    if depth == 0 {
        return ALGEBRAIC_FLOOR * scale;
    }
    let p = plan.scheme_order() as i32;
    let h = plan.step(depth);
    let truncation = TRUNCATION_FACTOR * h.powi(p.min(4));
    let denom: f64 = (1..=depth).map(|d| plan.step(d)).product();
    let roundoff = ROUNDOFF_FACTOR * f64::EPSILON / denom;
    scale * (ALGEBRAIC_FLOOR + truncation + roundoff)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grows_with_depth_and_scale() {
        let plan = DerivativePlan::default();
        let t: Vec<f64> = (0..4).map(|d| tolerance(&plan, d, 1.0)).collect();
        assert!(t.windows(2).all(|w| w[0] < w[1]));
        assert!(tolerance(&plan, 2, 10.0) > tolerance(&plan, 2, 1.0));
    }
}
