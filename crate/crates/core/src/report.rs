//! Machine-readable reports.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use crate::fd::DerivativePlan;

pub const SCHEMA_VERSION: u32 = 1;

/// How the sampled values are compared with `tol`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// Every value below `tol`.
    Below,
    /// Every value above `tol` (witness of non-vanishing).
    Above,
    /// More than half of the values above `tol` (detector sensitivity).
    MajorityAbove,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanInfo {
    pub h: f64,
    pub scheme: usize,
    pub richardson_levels: usize,
    pub nested_growth: f64,
    pub use_analytic: bool,
}

impl From<&DerivativePlan> for PlanInfo {
    fn from(p: &DerivativePlan) -> Self {
        PlanInfo {
            h: p.base_step,
            scheme: p.scheme_order(),
            richardson_levels: p.richardson_levels,
            nested_growth: p.nested_growth,
            use_analytic: p.use_analytic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub model_name: String,
    pub parameters: BTreeMap<String, Value>,
    pub check_name: String,
    pub num_points: usize,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub min_residual: f64,
    /// Points whose value exceeds `tol`.
    pub num_above: usize,
    pub tol: f64,
    pub bound: Bound,
    pub pass: bool,
    pub plan: PlanInfo,
    pub seed: u64,
}

impl IdentityReport {
    /// Summarises `values`; non-finite values count as failures.
    #[allow(clippy::too_many_arguments)]
    pub fn from_values(
        model_name: &str,
        parameters: BTreeMap<String, Value>,
        check_name: &str,
        values: &[f64],
        tol: f64,
        bound: Bound,
        plan: &DerivativePlan,
        seed: u64,
    ) -> Self {
        let count = values.len();
        let finite = values.iter().all(|v| v.is_finite());
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let mean = if count > 0 { values.iter().sum::<f64>() / count as f64 } else { 0.0 };
        let above = values.iter().filter(|v| **v > tol).count();
        let pass = count > 0
            && finite
            && match bound {
                Bound::Below => max < tol,
                Bound::Above => min > tol,
                Bound::MajorityAbove => 2 * above > count,
            };
        IdentityReport {
            model_name: model_name.to_string(),
            parameters,
            check_name: check_name.to_string(),
            num_points: count,
            max_residual: if count > 0 { max } else { 0.0 },
            mean_residual: mean,
            min_residual: if count > 0 { min } else { 0.0 },
            num_above: above,
            tol,
            bound,
            pass,
            plan: plan.into(),
            seed,
        }
    }

    pub fn line(&self) -> String {
        let rel = match self.bound {
            Bound::Below => "<",
            Bound::Above => ">",
            Bound::MajorityAbove => ">50%",
        };
        format!(
            "{} {:<28} {:<28} max={:.3e} mean={:.3e} min={:.3e} {} tol={:.3e} n={}",
            if self.pass { "PASS" } else { "FAIL" },
            self.model_name,
            self.check_name,
            self.max_residual,
            self.mean_residual,
            self.min_residual,
            rel,
            self.tol,
            self.num_points
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: usize,
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteSummary {
    pub schema_version: u32,
    pub version: String,
    pub seed: u64,
    pub criteria: Vec<CriterionOutcome>,
    pub reports: Vec<IdentityReport>,
    pub overall_pass: bool,
    pub wall_time: f64,
}

impl SuiteSummary {
    pub fn new(seed: u64, criteria: Vec<CriterionOutcome>, reports: Vec<IdentityReport>, wall_time: f64) -> Self {
        let overall_pass = criteria.iter().all(|c| c.pass) && reports.iter().all(|r| r.pass);
        SuiteSummary {
            schema_version: SCHEMA_VERSION,
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            criteria,
            reports,
            overall_pass,
            wall_time,
        }
    }

    /// Pretty JSON with `wall_time` zeroed, for reproducibility comparisons.
    pub fn deterministic_json(&self) -> String {
        let mut s = self.clone();
        s.wall_time = 0.0;
        serde_json::to_string_pretty(&s).expect("report serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(values: &[f64], bound: Bound) -> IdentityReport {
        IdentityReport::from_values("m", BTreeMap::new(), "c", values, 1.0, bound, &DerivativePlan::default(), 0)
    }

    #[test]
    fn pass_rules() {
        assert!(report(&[0.1, 0.9], Bound::Below).pass);
        assert!(!report(&[0.1, 1.1], Bound::Below).pass);
        assert!(!report(&[0.1, f64::NAN], Bound::Below).pass);
        assert!(report(&[2.0, 3.0], Bound::Above).pass);
        assert!(!report(&[0.5, 3.0], Bound::Above).pass);
        assert!(report(&[0.5, 3.0, 4.0], Bound::MajorityAbove).pass);
        assert!(!report(&[0.5, 3.0], Bound::MajorityAbove).pass);
        assert!(!report(&[], Bound::Below).pass);
    }

    #[test]
    fn summary_json_has_schema_version() {
        let s = SuiteSummary::new(3, vec![], vec![report(&[0.1], Bound::Below)], 1.5);
        assert!(s.overall_pass);
        let v: Value = serde_json::from_str(&s.deterministic_json()).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["wall_time"], 0.0);
    }
}
