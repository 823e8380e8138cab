//! Central differences with Richardson extrapolation.

use serde::Serialize;

use crate::error::{GeomError, Result};

/// How derivatives beyond the analytic ones are taken.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativePlan {
    /// Step of the outermost finite-difference level, in chart units.
    pub base_step: f64,
    /// Number of Richardson halvings on top of the second-order central
    /// difference; the resulting scheme has order `2 * (levels + 1)`.
    pub richardson_levels: usize,
    /// Each nested differentiation level uses `growth` times the step of the
    /// level above it, which keeps round-off of nested stencils bounded.
    pub nested_growth: f64,
    /// Use closed-form metric derivatives (orders 1 and 2) when the model has them.
    pub use_analytic: bool,
}

impl Default for DerivativePlan {
    fn default() -> Self {
        DerivativePlan { base_step: 1e-3, richardson_levels: 1, nested_growth: 3.0, use_analytic: true }
    }
}

impl DerivativePlan {
    pub fn with_step(base_step: f64) -> Self {
        DerivativePlan { base_step, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.base_step > 0.0 && self.base_step.is_finite()) {
            return Err(GeomError::InvalidParameter("step h must be > 0".into()));
        }
        if self.richardson_levels < 1 {
            return Err(GeomError::InvalidParameter("richardson_levels must be >= 1".into()));
        }
        if !(self.nested_growth >= 1.0) {
            return Err(GeomError::InvalidParameter("nested_growth must be >= 1".into()));
        }
        Ok(())
    }

    pub fn scheme_order(&self) -> usize {
        2 * (self.richardson_levels + 1)
    }

    /// Step used at nesting depth `depth` (1 = first derivative of an
    /// analytically computed field).
    pub fn step(&self, depth: usize) -> f64 {
        self.base_step * self.nested_growth.powi(depth.saturating_sub(1) as i32)
    }

    /// Total coordinate reach of `depth` nested stencils.
    pub fn reach(&self, depth: usize) -> f64 {
        let mut r = (1..=depth).map(|d| self.step(d)).sum::<f64>();
        if !self.use_analytic {
            // metric derivatives are themselves two nested levels deep
            r += 2.0 * self.base_step;
        }
        r
    }
}

/// Derivative of a vector-valued function along one coordinate axis.
pub fn partial<F>(field: &F, x: &[f64], axis: usize, h: f64, levels: usize) -> Vec<f64>
where
    F: Fn(&[f64]) -> Vec<f64> + ?Sized,
{
    let mut y = x.to_vec();
    let mut central = |step: f64| -> Vec<f64> {
        y[axis] = x[axis] + step;
        let fp = field(&y);
        y[axis] = x[axis] - step;
        let fm = field(&y);
        y[axis] = x[axis];
        fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * step)).collect()
    };
    let mut table: Vec<Vec<f64>> = (0..=levels).map(|k| central(h / f64::powi(2.0, k as i32))).collect();
    for j in 1..=levels {
        let factor = f64::powi(4.0, j as i32);
        for k in 0..=(levels - j) {
            let fine = table[k + 1].clone();
            for (c, f) in table[k].iter_mut().zip(fine) {
                *c = (factor * f - *c) / (factor - 1.0);
            }
        }
    }
    table.swap_remove(0)
}

/// All first partial derivatives, `out[axis][component]`.
pub fn jacobian<F>(field: &F, x: &[f64], h: f64, levels: usize) -> Vec<Vec<f64>>
where
    F: Fn(&[f64]) -> Vec<f64> + ?Sized,
{
    (0..x.len()).map(|a| partial(field, x, a, h, levels)).collect()
}

/// Derivative of a scalar function of one variable.
pub fn derivative_1d<F: Fn(f64) -> f64>(f: F, x: f64, h: f64, levels: usize) -> f64 {
    partial(&|y: &[f64]| vec![f(y[0])], &[x], 0, h, levels)[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_reaches_design_order() {
        // error of the level-1 scheme on sin at x=0.4 must shrink ~16x per halving
        let exact = 0.4f64.cos();
        let e1 = (derivative_1d(f64::sin, 0.4, 0.2, 1) - exact).abs();
        let e2 = (derivative_1d(f64::sin, 0.4, 0.1, 1) - exact).abs();
        let p = (e1 / e2).log2();
        assert!((p - 4.0).abs() < 0.2, "order {p}");
        let e1 = (derivative_1d(f64::sin, 0.4, 0.4, 2) - exact).abs();
        let e2 = (derivative_1d(f64::sin, 0.4, 0.2, 2) - exact).abs();
        let p = (e1 / e2).log2();
        assert!((p - 6.0).abs() < 0.3, "order {p}");
    }

    #[test]
    fn vector_fields_and_axes() {
        let f = |x: &[f64]| vec![x[0] * x[1], x[1].exp()];
        let j = jacobian(&f, &[0.5, 0.2], 1e-2, 2);
        assert!((j[0][0] - 0.2).abs() < 1e-12);
        assert!((j[1][0] - 0.5).abs() < 1e-12);
        assert!(j[0][1].abs() < 1e-12);
        assert!((j[1][1] - 0.2f64.exp()).abs() < 1e-11);
    }

    #[test]
    fn plan_validation() {
        assert!(DerivativePlan::default().validate().is_ok());
        assert!(DerivativePlan::with_step(0.0).validate().is_err());
        let p = DerivativePlan { richardson_levels: 0, ..Default::default() };
        assert!(p.validate().is_err());
        let p = DerivativePlan::default();
        assert_eq!(p.scheme_order(), 4);
        assert!((p.reach(2) - (1e-3 + 3e-3)).abs() < 1e-15);
    }
}
