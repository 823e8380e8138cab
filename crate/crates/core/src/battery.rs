//! The identity battery: named per-point checks, their applicability to a
//! model, and their aggregation into reports.

use serde::Serialize;

use crate::curvature::{schouten, weyl, Geometry};
use crate::fd::DerivativePlan;
use crate::model::{MetricModel, Tag};
use crate::report::{Bound, IdentityReport};
use crate::sampling::sample_points;
use crate::sweep::map_points;
use crate::tensor::{kulkarni_nomizu, metric_contract, norm};
use crate::vstatic::{
    dim3_bach_identity_at, divergence_identity_at, bach_flux_at, grad_ricci_identity_at, cotton_identity_at, level_set_probe_at, parallel_ricci_at,
    point_data, t_tensor_at, vstatic_residuals_at,
};

/// Lower bound for `|Ric|² - R²/n` on static-vacuum products.
pub const TRACELESS_RICCI_WITNESS: f64 = 0.1;
/// Deepest nesting used by any check; sampling keeps this stencil inside the chart.
pub const MAX_DEPTH: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckId {
    MetricCompatibility,
    SecondBianchi,
    WeylReconstruction,
    WeylTraceFree,
    ScalarCurvature,
    CottonTwoPath,
    VstaticMain,
    VstaticTrace,
    VstaticTraceless,
    VstaticConsistency,
    TTensor,
    GradRicciIdentity,
    CottonIdentity,
    DivergenceIdentity,
    BachFlux,
    Dim3DivBach,
    Dim3BachRicciCotton,
    ParallelRicci,
    Obstruction,
    TracelessRicciWitness,
    BachFlat,
    BachRadial,
    LevelSetUmbilicity,
    LevelSetGradVariation,
    LevelSetMixedRicci,
    LevelSetMixedRiemann,
    LevelSetMeanCurvature,
    WeylNorm,
}

impl CheckId {
    pub fn name(self) -> &'static str {
        use CheckId::*;
        match self {
            MetricCompatibility => "metric_compatibility",
            SecondBianchi => "second_bianchi",
            WeylReconstruction => "weyl_reconstruction",
            WeylTraceFree => "weyl_trace_free",
            ScalarCurvature => "scalar_curvature",
            CottonTwoPath => "cotton_two_path",
            VstaticMain => "vstatic_residual",
            VstaticTrace => "vstatic_trace",
            VstaticTraceless => "vstatic_traceless",
            VstaticConsistency => "vstatic_consistency",
            TTensor => "t_tensor",
            GradRicciIdentity => "grad_ricci_identity",
            CottonIdentity => "cotton_identity",
            DivergenceIdentity => "divergence_identity",
            BachFlux => "bach_flux_identity",
            Dim3DivBach => "dim3_div_bach",
            Dim3BachRicciCotton => "dim3_bach_ricci_cotton",
            ParallelRicci => "parallel_ricci",
            Obstruction => "obstruction",
            TracelessRicciWitness => "traceless_ricci_witness",
            BachFlat => "bach_flat",
            BachRadial => "bach_radial",
            LevelSetUmbilicity => "level_set_umbilicity",
            LevelSetGradVariation => "level_set_grad_variation",
            LevelSetMixedRicci => "level_set_mixed_ricci",
            LevelSetMixedRiemann => "level_set_mixed_riemann",
            LevelSetMeanCurvature => "level_set_mean_curvature",
            WeylNorm => "weyl_norm",
        }
    }

    /// Number of nested difference levels above the algebraic curvature.
    pub fn depth(self) -> usize {
        use CheckId::*;
        match self {
            MetricCompatibility | SecondBianchi | CottonTwoPath | GradRicciIdentity | CottonIdentity | DivergenceIdentity | ParallelRicci => 1,
            BachFlux | BachFlat | BachRadial => 2,
            Dim3DivBach | Dim3BachRicciCotton => 3,
            _ => 0,
        }
    }

    pub fn bound(self) -> Bound {
        match self {
            CheckId::TracelessRicciWitness | CheckId::WeylNorm => Bound::Above,
            _ => Bound::Below,
        }
    }
}

/// Checks that apply to `model`, in report order.
pub fn applicable_checks(model: &MetricModel) -> Vec<CheckId> {
    use CheckId::*;
    let n = model.n;
    let critical = model.has(Tag::Vstatic) || model.has(Tag::StaticVacuum);
    let mut out = vec![MetricCompatibility, SecondBianchi, WeylReconstruction];
    if n >= 4 {
        out.extend([WeylTraceFree, CottonTwoPath]);
    }
    if model.expected_scalar_curvature.is_some() {
        out.push(ScalarCurvature);
    }
    if model.has(Tag::Einstein) {
        out.push(BachFlat);
    }
    if model.has(Tag::Einstein) || model.has(Tag::ParallelRicci) {
        out.push(ParallelRicci);
    }
    if critical {
        out.extend([VstaticMain, VstaticTrace, VstaticTraceless, VstaticConsistency, GradRicciIdentity, CottonIdentity, DivergenceIdentity]);
        if n >= 4 {
            out.push(BachFlux);
        } else {
            out.extend([Dim3DivBach, Dim3BachRicciCotton]);
        }
        if model.kappa != 0.0 && (model.has(Tag::Einstein) || model.has(Tag::ParallelRicci)) {
            out.push(Obstruction);
        }
        if model.kappa == 0.0 && model.has(Tag::StaticVacuum) {
            out.push(TracelessRicciWitness);
        }
    }
    if model.has(Tag::Vstatic) {
        out.push(TTensor);
        if n >= 4 {
            out.push(BachRadial);
        }
        out.extend([LevelSetUmbilicity, LevelSetGradVariation, LevelSetMixedRicci, LevelSetMixedRiemann]);
        if model.warp.is_some() && model.has(Tag::WarpedProduct) {
            out.push(LevelSetMeanCurvature);
        }
    }
    out
}

/// Everything a check needs besides the point.
#[derive(Debug, Clone, Copy)]
pub struct CheckContext<'a> {
    pub model: &'a MetricModel,
    pub plan: &'a DerivativePlan,
    pub seed: u64,
    pub tol_scale: f64,
    /// Sign applied to the Kulkarni-Nomizu product in the Weyl reconstruction.
    pub kn_sign: f64,
}

impl<'a> CheckContext<'a> {
    pub fn new(model: &'a MetricModel, plan: &'a DerivativePlan, seed: u64) -> Self {
        CheckContext { model, plan, seed, tol_scale: 1.0, kn_sign: 1.0 }
    }

    pub fn geometry(&self) -> Geometry<'a> {
        Geometry::new(self.model, self.plan)
    }

    pub fn tol(&self, id: CheckId) -> f64 {
        match id {
            CheckId::TracelessRicciWitness | CheckId::WeylNorm => TRACELESS_RICCI_WITNESS,
            _ => self.geometry().tol(id.depth()) * self.tol_scale,
        }
    }

    /// Sampling margin shared by every check on this model.
    pub fn margin(&self) -> f64 {
        self.plan.reach(MAX_DEPTH) * 1.01
    }

    pub fn points(&self, count: usize) -> Vec<Vec<f64>> {
        sample_points(self.model, count, self.margin(), self.seed)
    }

    /// Value of check `id` at `x`; `None` where the check is undefined
    /// (level-set probes at critical points).
    pub fn value(&self, id: CheckId, x: &[f64]) -> Option<f64> {
        use CheckId::*;
        let geo = self.geometry();
        let n = self.model.n;
        let v = match id {
            MetricCompatibility => {
                let m = geo.metric(x);
                norm(&geo.covariant_derivative(&|y: &[f64]| geo.metric(y).as_tensor(), x, 1), &m)
            }
            SecondBianchi => {
                let m = geo.metric(x);
                let (l, r) = geo.div_riemann(x);
                norm(&l.sub(&r), &m)
            }
            WeylReconstruction => {
                let lc = geo.local(x);
                let m = &lc.connection.metric;
                let w = weyl(&lc.riemann, &lc.ricci, lc.scalar, m);
                let a = schouten(&lc.ricci, lc.scalar, m);
                let kn = kulkarni_nomizu(&a, &m.as_tensor()).expect("rank-2 inputs");
                let rebuilt = kn.scaled(self.kn_sign / (n as f64 - 2.0)).add(&w);
                norm(&lc.riemann.sub(&rebuilt), m)
            }
            WeylTraceFree => {
                let m = geo.metric(x);
                norm(&metric_contract(&geo.weyl(x), 0, 2, &m), &m)
            }
            WeylNorm => {
                let m = geo.metric(x);
                norm(&geo.weyl(x), &m)
            }
            ScalarCurvature => (geo.local(x).scalar - self.model.expected_scalar_curvature?).abs(),
            CottonTwoPath => {
                let m = geo.metric(x);
                let c2 = geo.cotton_from_weyl(x).ok()?;
                norm(&geo.cotton(x).sub(&c2), &m)
            }
            VstaticMain => vstatic_residuals_at(&geo, x).main_norm,
            VstaticTrace => vstatic_residuals_at(&geo, x).trace.abs(),
            VstaticTraceless => vstatic_residuals_at(&geo, x).traceless_norm,
            VstaticConsistency => {
                let r = vstatic_residuals_at(&geo, x);
                r.consistency_defect(&geo.metric(x))
            }
            TTensor => t_tensor_at(&geo, x).norm_sq.sqrt(),
            GradRicciIdentity => norm(&grad_ricci_identity_at(&geo, x), &geo.metric(x)),
            CottonIdentity => cotton_identity_at(&geo, x).residual_norm,
            DivergenceIdentity => divergence_identity_at(&geo, x).residual(),
            BachFlux => bach_flux_at(&geo, x).ok()?.scaled_residual(),
            Dim3DivBach => dim3_bach_identity_at(&geo, x).ok()?.0.abs(),
            Dim3BachRicciCotton => dim3_bach_identity_at(&geo, x).ok()?.1.abs(),
            ParallelRicci => parallel_ricci_at(&geo, x).grad_ric_norm,
            Obstruction => {
                let lc = geo.local(x);
                let m = &lc.connection.metric;
                let nf = n as f64;
                let tl = crate::tensor::full_norm_sq(&lc.ricci, m) - lc.scalar * lc.scalar / nf;
                (self.model.kappa * nf / (nf - 1.0) * tl).abs()
            }
            TracelessRicciWitness => {
                let lc = geo.local(x);
                crate::tensor::full_norm_sq(&lc.ricci, &lc.connection.metric) - lc.scalar * lc.scalar / n as f64
            }
            BachFlat => norm(&geo.bach(x), &geo.metric(x)),
            BachRadial => {
                let pd = point_data(&geo, x);
                let b = geo.bach(x);
                let bg = crate::tensor::contract_vector(&b, 1, &pd.grad);
                bg.data().iter().zip(&pd.grad).map(|(p, q)| p * q).sum::<f64>().abs()
            }
            LevelSetUmbilicity => level_set_probe_at(&geo, x).ok()?.umbilicity_dev,
            LevelSetGradVariation => level_set_probe_at(&geo, x).ok()?.grad_norm_tangential_variation,
            LevelSetMixedRicci => level_set_probe_at(&geo, x).ok()?.mixed_ricci,
            LevelSetMixedRiemann => level_set_probe_at(&geo, x).ok()?.mixed_riemann,
            LevelSetMeanCurvature => {
                let probe = level_set_probe_at(&geo, x).ok()?;
                let [phi, dphi, _] = self.model.warp.as_ref()?.jet(x[0]);
                (probe.mean_curv.abs() - (n as f64 - 1.0) * (dphi / phi).abs()).abs()
            }
        };
        Some(v)
    }

    /// Runs `id` on `points` and summarises.
    pub fn run(&self, id: CheckId, points: &[Vec<f64>]) -> IdentityReport {
        let values: Vec<f64> = map_points(points, |x| self.value(id, x)).into_iter().flatten().collect();
        self.report(id.name(), &values, self.tol(id), id.bound())
    }

    pub fn report(&self, name: &str, values: &[f64], tol: f64, bound: Bound) -> IdentityReport {
        IdentityReport::from_values(
            &self.model.name,
            self.model.params.clone(),
            name,
            values,
            tol,
            bound,
            self.plan,
            self.seed,
        )
    }
}

/// Full applicable battery on `grid` sampled points.
pub fn battery(model: &MetricModel, plan: &DerivativePlan, grid: usize, seed: u64, tol_scale: f64) -> Vec<IdentityReport> {
    let ctx = CheckContext { tol_scale, ..CheckContext::new(model, plan, seed) };
    let points = ctx.points(grid);
    applicable_checks(model).into_iter().map(|id| ctx.run(id, &points)).collect()
}
