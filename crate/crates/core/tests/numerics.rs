use vstatic_core::battery::{battery, applicable_checks, CheckContext, CheckId};
use vstatic_core::curvature::Geometry;
use vstatic_core::fd::DerivativePlan;
use vstatic_core::model::{doubly_warped_model, sphere_model};
use vstatic_core::suite::{run_suite, SuiteConfig};
use vstatic_core::tensor::norm;
use vstatic_core::sampling::DEFAULT_SEED;

fn small_config(seed: u64) -> SuiteConfig {
    SuiteConfig { vstatic_points: 12, battery_points: 8, probe_points: 12, ..SuiteConfig::new(seed) }
}

#[test]
fn sphere_residuals_sit_below_their_tolerances() {
    let model = sphere_model(4, 1.0, 1.0).unwrap();
    let plan = DerivativePlan::default();
    let reports = battery(&model, &plan, 40, DEFAULT_SEED, 1.0);
    assert_eq!(reports.len(), applicable_checks(&model).len());
    for r in &reports {
        assert!(r.pass, "{}", r.line());
    }
    // the estimate should not be vacuous: depth-2 checks land within a few decades
    let ctx = CheckContext::new(&model, &plan, DEFAULT_SEED);
    let pts = ctx.points(40);
    let bach = ctx.run(CheckId::BachFlat, &pts);
    assert!(bach.max_residual < bach.tol && bach.max_residual > 1e-6 * bach.tol, "{}", bach.line());
}

#[test]
fn nested_derivatives_converge_at_fourth_order() {
    let model = sphere_model(4, 1.0, 1.0).unwrap();
    let x = [1.3, 1.1, 1.4, 0.2];
    // ∇Ric vanishes on the sphere, so its size is the truncation error
    let err = |h: f64| {
        let plan = DerivativePlan::with_step(h);
        let geo = Geometry::new(&model, &plan);
        norm(&geo.grad_ricci(&x), &geo.metric(&x))
    };
    let order = (err(0.08) / err(0.04)).log2();
    assert!((3.5..=4.5).contains(&order), "observed order {order}");
}

#[test]
fn flipped_kulkarni_nomizu_sign_is_caught() {
    let model = doubly_warped_model();
    let plan = DerivativePlan::default();
    let good = CheckContext::new(&model, &plan, DEFAULT_SEED);
    let bad = CheckContext { kn_sign: -1.0, ..good };
    let pts = good.points(10);
    assert!(good.run(CheckId::WeylReconstruction, &pts).pass);
    assert!(!bad.run(CheckId::WeylReconstruction, &pts).pass);

    let summary = run_suite(&SuiteConfig { kn_sign: -1.0, ..small_config(DEFAULT_SEED) });
    let c3 = summary.criteria.iter().find(|c| c.id == 3).unwrap();
    assert!(!c3.pass, "{}", c3.detail);
    assert!(!summary.overall_pass);
}

#[test]
fn suite_is_reproducible() {
    let a = run_suite(&small_config(DEFAULT_SEED));
    let b = run_suite(&small_config(DEFAULT_SEED));
    assert_eq!(a.deterministic_json(), b.deterministic_json());
    let c = run_suite(&small_config(DEFAULT_SEED + 1));
    assert_ne!(a.deterministic_json(), c.deterministic_json());
}
