//! The acceptance suite: eleven criteria, each reduced to a pass/fail
//! verdict plus the identity reports behind it.

use std::time::Instant;

use crate::battery::{CheckContext, CheckId};
use crate::curvature::Geometry;
use crate::fd::DerivativePlan;
use crate::model::{
    catalog, cosh_warped_model, doubly_warped_model, euclidean_model, generic_warped_model, hyperbolic_model,
    hyperbolic_product_static, perturbed_product_model, perturbed_sphere_model, sphere_model, sphere_pair_model,
    sphere_product_static, MetricModel, Tag, WarpedFiberSpec,
};
use crate::ode::{classify, closed_form, integrate, CaseLabel, OdeProblem, OdeTrajectory};
use crate::profile::shared;
use crate::report::{Bound, CriterionOutcome, IdentityReport, SuiteSummary};
use crate::sampling::sample_points;
use crate::sweep::{map_points, map_sequential};
use crate::tensor::norm;
use crate::tolerance::tolerance;

/// Budget for criterion 1, per model.
pub const PER_MODEL_SECONDS: f64 = 30.0;
/// Budget for the whole suite.
pub const SUITE_SECONDS: f64 = 300.0;

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    pub plan: DerivativePlan,
    /// Sign of the Kulkarni-Nomizu product used by the Weyl reconstruction.
    pub kn_sign: f64,
    pub vstatic_points: usize,
    pub battery_points: usize,
    pub probe_points: usize,
    pub ode_step: f64,
}

impl SuiteConfig {
    pub fn new(seed: u64) -> Self {
        SuiteConfig {
            seed,
            plan: DerivativePlan::default(),
            kn_sign: 1.0,
            vstatic_points: 200,
            battery_points: 50,
            probe_points: 100,
            ode_step: 1e-3,
        }
    }
}

struct Collector<'c> {
    cfg: &'c SuiteConfig,
    criteria: Vec<CriterionOutcome>,
    reports: Vec<IdentityReport>,
}

impl<'c> Collector<'c> {
    fn ctx<'a>(&self, model: &'a MetricModel) -> CheckContext<'a>
    where
        'c: 'a,
    {
        CheckContext { kn_sign: self.cfg.kn_sign, ..CheckContext::new(model, &self.cfg.plan, self.cfg.seed) }
    }

    fn finish(&mut self, id: usize, name: &str, reports: Vec<IdentityReport>, extra_ok: bool, detail: String) {
        let pass = extra_ok && reports.iter().all(|r| r.pass);
        let failing: Vec<String> =
            reports.iter().filter(|r| !r.pass).map(|r| format!("{}/{}", r.model_name, r.check_name)).collect();
        let detail = if failing.is_empty() { detail } else { format!("{detail}; failing: {}", failing.join(", ")) };
        self.criteria.push(CriterionOutcome { id, name: name.to_string(), pass, detail });
        self.reports.extend(reports);
    }
}

fn vstatic_catalog() -> Vec<MetricModel> {
    catalog().into_iter().filter(|m| m.has(Tag::Vstatic)).collect()
}

fn worst_ratio(reports: &[IdentityReport]) -> f64 {
    reports.iter().filter(|r| r.bound == Bound::Below).map(|r| r.max_residual / r.tol).fold(0.0, f64::max)
}

fn warped_n5() -> MetricModel {
    let mut m = cosh_warped_model(5, 1.0, 1.0, &WarpedFiberSpec::hyperbolic_plane_pair(-3.0)).expect("valid parameters");
    m.name = "cosh-warped-n5-H2(-3)xH2(-3)".into();
    m
}

fn named(mut m: MetricModel) -> MetricModel {
    m.name = format!("{}-n{}", m.name, m.n);
    m
}

fn criterion1(c: &mut Collector) {
    let mut reports = Vec::new();
    let mut slowest = 0.0f64;
    for model in vstatic_catalog() {
        let t = Instant::now();
        let ctx = c.ctx(&model);
        let pts = ctx.points(c.cfg.vstatic_points);
        reports.push(ctx.run(CheckId::VstaticMain, &pts));
        slowest = slowest.max(t.elapsed().as_secs_f64());
    }
    let detail = format!(
        "{} models x {} points, worst max/tol = {:.2e}",
        reports.len(),
        c.cfg.vstatic_points,
        worst_ratio(&reports)
    );
    c.finish(1, "V-static residual suite", reports, slowest < PER_MODEL_SECONDS, detail);
}

fn criterion2(c: &mut Collector) {
    let mut reports = Vec::new();
    for model in [hyperbolic_product_static(1, 3), sphere_product_static(1, 3)] {
        let model = named(model.expect("valid parameters"));
        let ctx = c.ctx(&model);
        let pts = ctx.points(c.cfg.vstatic_points);
        for id in [CheckId::VstaticMain, CheckId::ParallelRicci, CheckId::TracelessRicciWitness] {
            reports.push(ctx.run(id, &pts));
        }
    }
    let witness = reports
        .iter()
        .filter(|r| r.check_name == CheckId::TracelessRicciWitness.name())
        .map(|r| r.min_residual)
        .fold(f64::INFINITY, f64::min);
    let detail = format!("kappa = 0 products, min |Ric|^2 - R^2/n = {witness:.4}, worst max/tol = {:.2e}", worst_ratio(&reports));
    c.finish(2, "Static-vacuum products", reports, true, detail);
}

fn criterion3(c: &mut Collector) {
    let mut reports = Vec::new();
    let mut models: Vec<MetricModel> =
        catalog().into_iter().filter(|m| m.has(Tag::Vstatic) || m.has(Tag::StaticVacuum)).collect();
    for model in &models {
        let ctx = c.ctx(model);
        let pts = ctx.points(c.cfg.battery_points);
        let mut ids = vec![CheckId::GradRicciIdentity, CheckId::CottonIdentity, CheckId::DivergenceIdentity];
        if model.n >= 4 {
            ids.push(CheckId::BachFlux);
        }
        reports.extend(ids.into_iter().map(|id| ctx.run(id, &pts)));
    }
    let w5 = warped_n5();
    let ctx = c.ctx(&w5);
    let pts = ctx.points(c.cfg.battery_points);
    reports.push(ctx.run(CheckId::WeylNorm, &pts));
    // the decomposition of Rm through ⊙ arbitrates every sign convention
    models.push(sphere_pair_model());
    models.push(doubly_warped_model());
    for model in &models {
        let ctx = c.ctx(model);
        let pts = ctx.points(c.cfg.battery_points);
        reports.push(ctx.run(CheckId::WeylReconstruction, &pts));
    }
    let detail = format!("{} reports, worst max/tol = {:.2e}", reports.len(), worst_ratio(&reports));
    c.finish(3, "Tensor-identity battery", reports, true, detail);
}

fn criterion4(c: &mut Collector) {
    let w5 = warped_n5();
    let ctx = c.ctx(&w5);
    let pts = ctx.points(c.cfg.battery_points);
    let mut reports = vec![ctx.run(CheckId::CottonTwoPath, &pts)];

    let dw = doubly_warped_model();
    let ctx = c.ctx(&dw);
    let pts = ctx.points(c.cfg.battery_points);
    let geo = ctx.geometry();
    let pairs = map_points(&pts, |x| {
        let m = geo.metric(x);
        let c1 = geo.cotton(x);
        let c2 = geo.cotton_from_weyl(x).expect("n >= 4");
        (norm(&c1.sub(&c2), &m) / norm(&c1, &m), norm(&c1, &m))
    });
    let rel: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let min_c = pairs.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    reports.push(ctx.report("cotton_two_path_relative", &rel, 1e-4, Bound::Below));
    let detail = format!(
        "n=5 warped: max |C1-C2| = {:.2e} (both routes vanish); doubly warped: max rel = {:.2e}, min |C| = {:.3}",
        reports[0].max_residual, reports[1].max_residual, min_c
    );
    c.finish(4, "Two-path Cotton", reports, min_c > 1e-3, detail);
}

fn criterion5(c: &mut Collector) {
    let mut reports = Vec::new();
    let mut flat: Vec<MetricModel> = Vec::new();
    for n in 3..=5 {
        flat.push(named(sphere_model(n, 1.0, 1.0).expect("valid parameters")));
        flat.push(named(hyperbolic_model(n, 1.0, 1.0).expect("valid parameters")));
        flat.push(named(euclidean_model(n, 1.0, 1.0).expect("valid parameters")));
    }
    flat.push(sphere_pair_model());
    for model in &flat {
        let ctx = c.ctx(model);
        let pts = ctx.points(c.cfg.battery_points);
        reports.push(ctx.run(CheckId::BachFlat, &pts));
    }
    for model in vstatic_catalog().iter().filter(|m| m.n >= 4) {
        let ctx = c.ctx(model);
        let pts = ctx.points(c.cfg.battery_points);
        reports.push(ctx.run(CheckId::BachRadial, &pts));
    }
    let detail = format!("{} reports, worst max/tol = {:.2e}", reports.len(), worst_ratio(&reports));
    c.finish(5, "Bach checks", reports, true, detail);
}

fn criterion6(c: &mut Collector) {
    let mut reports = Vec::new();
    let mut regular_ok = true;
    for model in vstatic_catalog() {
        let ctx = c.ctx(&model);
        let pts = ctx.points(c.cfg.probe_points);
        let mut ids = vec![
            CheckId::LevelSetUmbilicity,
            CheckId::LevelSetGradVariation,
            CheckId::LevelSetMixedRicci,
            CheckId::LevelSetMixedRiemann,
        ];
        if model.warp.is_some() {
            ids.push(CheckId::LevelSetMeanCurvature);
        }
        for id in ids {
            let r = ctx.run(id, &pts);
            regular_ok &= r.num_points == c.cfg.probe_points;
            reports.push(r);
        }
    }
    let detail = format!(
        "{} probes at {} regular points per model, worst max/tol = {:.2e}",
        reports.len(),
        c.cfg.probe_points,
        worst_ratio(&reports)
    );
    c.finish(6, "Level-set probes", reports, regular_ok, detail);
}

struct OdeCase {
    name: &'static str,
    problem: OdeProblem,
    expected: CaseLabel,
}

fn ode_cases(step: f64) -> Vec<OdeCase> {
    let span = |p: OdeProblem| OdeProblem { r0: 0.0, r_span: (-4.0, 4.0), ..p };
    vec![
        OdeCase { name: "sphere", problem: OdeProblem::smooth_closure(4, 12.0, 4.0, step), expected: CaseLabel::Sphere },
        OdeCase { name: "euclidean", problem: OdeProblem::smooth_closure(4, 0.0, 10.0, step), expected: CaseLabel::Euclidean },
        OdeCase { name: "hyperbolic", problem: OdeProblem::smooth_closure(4, -12.0, 3.0, step), expected: CaseLabel::Hyperbolic },
        OdeCase {
            name: "hyperbolic-n5",
            problem: OdeProblem::smooth_closure(5, -20.0, 3.0, step),
            expected: CaseLabel::Hyperbolic,
        },
        OdeCase {
            name: "generic",
            problem: span(OdeProblem::new(4, -5.0, 2.0, 1.0, 0.0, 4.0, step)),
            expected: CaseLabel::GenericWarped,
        },
        OdeCase {
            name: "positive-one-zero",
            problem: OdeProblem::new(4, 12.0, 2.0, 1.0, 0.0, 4.0, step),
            expected: CaseLabel::Inconsistent,
        },
        OdeCase {
            name: "negative-two-zeros",
            problem: span(OdeProblem::new(4, -12.0, -10.0, 1.0, 0.0, 4.0, step)),
            expected: CaseLabel::Inconsistent,
        },
    ]
}

fn closed_form_error(p: &OdeProblem, t: &OdeTrajectory) -> f64 {
    let exact = closed_form(p.r_curv, p.n);
    t.nodes.iter().map(|nd| (nd.phi - exact(nd.r).0).abs()).fold(0.0, f64::max)
}

fn criterion7(c: &mut Collector) {
    let mut ok = true;
    let mut parts = Vec::new();
    for case in ode_cases(c.cfg.ode_step) {
        match integrate(&case.problem) {
            Ok(t) => {
                let label = classify(&case.problem, &t);
                ok &= label == case.expected;
                if case.problem.phi0 == 0.0 {
                    let err = closed_form_error(&case.problem, &t);
                    ok &= err < 1e-7;
                    parts.push(format!("{}={label} err={err:.1e}", case.name));
                } else {
                    parts.push(format!("{}={label}", case.name));
                }
                if case.name == "sphere" {
                    let z = t.zero_crossings.get(1).copied().unwrap_or(f64::NAN);
                    let dz = (z - std::f64::consts::PI).abs();
                    ok &= dz < 1e-6;
                    parts.push(format!("|zero - pi| = {dz:.1e}"));
                }
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{}: {e}", case.name));
            }
        }
    }
    c.finish(7, "ODE closed forms", vec![], ok, parts.join(", "));
}

/// Observed order of the integrator against `sin r` from a regular start.
pub fn observed_order(h: f64) -> f64 {
    let err = |step: f64| {
        let p = OdeProblem {
            n: 4,
            r_curv: 12.0,
            lambda: 2.0,
            phi0: 1f64.sin(),
            dphi0: 1f64.cos(),
            r0: 1.0,
            r_span: (1.0, 2.6),
            step,
        };
        let t = integrate(&p).expect("regular start");
        t.nodes.iter().map(|nd| (nd.phi - nd.r.sin()).abs()).fold(0.0, f64::max)
    };
    (err(h) / err(h / 2.0)).log2()
}

fn criterion8(c: &mut Collector) {
    let mut ok = true;
    let mut worst_drift = 0.0f64;
    let mut worst_closure = 0.0f64;
    for case in ode_cases(c.cfg.ode_step) {
        let Ok(t) = integrate(&case.problem) else {
            ok = false;
            continue;
        };
        let j0 = case.problem.first_integral(case.problem.phi0, case.problem.dphi0);
        let drift = t.j_drift_per_unit(j0);
        worst_drift = worst_drift.max(drift);
        if case.problem.phi0 == 0.0 {
            let m = t.nodes.iter().map(|n| n.j.abs()).fold(0.0, f64::max);
            worst_closure = worst_closure.max(m);
        }
    }
    ok &= worst_drift < 1e-9 && worst_closure < 1e-9;
    let order = observed_order(0.04);
    ok &= (3.5..=4.5).contains(&order);
    let detail = format!("max J drift/unit r = {worst_drift:.1e}, max |J| on closure branches = {worst_closure:.1e}, order = {order:.3}");
    c.finish(8, "First integral", vec![], ok, detail);
}

/// Scalar-curvature tolerance of a metric rebuilt from a trajectory with
/// node spacing `step`: the curvature sees second derivatives of node data.
pub fn round_trip_tol(step: f64) -> f64 {
    tolerance(&DerivativePlan::with_step(step), 2, 1.0)
}

fn criterion9(c: &mut Collector) {
    let prob = OdeProblem::smooth_closure(4, 12.0, 4.0, c.cfg.ode_step);
    let outcome = integrate(&prob).and_then(|t| {
        let warp = shared(t.interpolant());
        generic_warped_model(4, warp, (0.5, std::f64::consts::PI - 0.5), &WarpedFiberSpec::round_sphere(3), None)
    });
    let tol = 10.0 * round_trip_tol(c.cfg.ode_step);
    match outcome {
        Ok(model) => {
            let ctx = c.ctx(&model);
            let pts = sample_points(&model, c.cfg.battery_points, ctx.margin(), c.cfg.seed);
            let geo = Geometry::new(&model, &c.cfg.plan);
            let errs = map_points(&pts, |x| (geo.local(x).scalar - 12.0).abs());
            let r = ctx.report("round_trip_scalar_curvature", &errs, tol, Bound::Below);
            let detail = format!("max |R - 12| = {:.2e} < 10 tol = {tol:.2e}", r.max_residual);
            c.finish(9, "Cross-module round trip", vec![r], true, detail);
        }
        Err(e) => c.finish(9, "Cross-module round trip", vec![], false, e.to_string()),
    }
}

fn criterion10(c: &mut Collector) {
    let mut reports = Vec::new();
    let pp = perturbed_product_model(1, 3).expect("valid parameters");
    let ps = perturbed_sphere_model(4, 1.0, 1.0).expect("valid parameters");
    for (model, ids) in [
        (&pp, vec![CheckId::VstaticMain, CheckId::GradRicciIdentity, CheckId::DivergenceIdentity]),
        (&ps, vec![CheckId::VstaticMain]),
    ] {
        let ctx = c.ctx(model);
        let pts = ctx.points(c.cfg.battery_points);
        for id in ids {
            let values: Vec<f64> = map_points(&pts, |x| ctx.value(id, x)).into_iter().flatten().collect();
            let name = format!("{}_sensitivity", id.name());
            reports.push(ctx.report(&name, &values, 10.0 * ctx.tol(id), Bound::MajorityAbove));
        }
    }
    let parts: Vec<String> =
        reports.iter().map(|r| format!("{}/{} {}/{}", r.model_name, r.check_name, r.num_above, r.num_points)).collect();
    c.finish(10, "Sensitivity", reports, true, parts.join(", "));
}

/// Runs the suite. Criterion 11 re-evaluates one battery sequentially and
/// demands bit-identical results.
pub fn run_suite(cfg: &SuiteConfig) -> SuiteSummary {
    let start = Instant::now();
    let mut c = Collector { cfg, criteria: Vec::new(), reports: Vec::new() };
    criterion1(&mut c);
    criterion2(&mut c);
    criterion3(&mut c);
    criterion4(&mut c);
    criterion5(&mut c);
    criterion6(&mut c);
    criterion7(&mut c);
    criterion8(&mut c);
    criterion9(&mut c);
    criterion10(&mut c);

    let w5 = warped_n5();
    let ctx = c.ctx(&w5);
    let pts = ctx.points(c.cfg.battery_points.min(20));
    let par: Vec<Option<f64>> = map_points(&pts, |x| ctx.value(CheckId::CottonIdentity, x));
    let seq: Vec<Option<f64>> = map_sequential(&pts, |x| ctx.value(CheckId::CottonIdentity, x));
    let same = par.iter().zip(&seq).all(|(a, b)| a.map(f64::to_bits) == b.map(f64::to_bits));
    let elapsed = start.elapsed().as_secs_f64();
    let detail = format!("deterministic = {same}, elapsed < {SUITE_SECONDS} s: {}", elapsed < SUITE_SECONDS);
    c.finish(11, "Suite runtime and determinism", vec![], same && elapsed < SUITE_SECONDS, detail);
    let wall = start.elapsed().as_secs_f64();
    SuiteSummary::new(cfg.seed, c.criteria, c.reports, wall)
}

pub fn criterion_line(c: &CriterionOutcome) -> String {
    format!("[{}] criterion {:>2}: {} ({})", if c.pass { "PASS" } else { "FAIL" }, c.id, c.name, c.detail)
}
