use vstatic_core::curvature::{christoffel, riemann_ricci_scalar, Geometry};
use vstatic_core::fd::DerivativePlan;
use vstatic_core::model::{
    cosh_warped_model, euclidean_model, generic_warped_model, hyperbolic_model, sphere_cos_squared_pair,
    sphere_model, MetricModel, WarpedFiberSpec,
};
use vstatic_core::profile::{shared, HypCosine, Linear, Sine};
use vstatic_core::tensor::{norm, Point};
use vstatic_core::vstatic::{dim3_bach_identity, level_set_probe, t_tensor, vstatic_residuals};

fn at(model: &MetricModel, frac: f64) -> Point {
    Point::new(model.domain.iter().enumerate().map(|(i, (a, b))| a + (b - a) * (frac + 0.07 * i as f64)).collect()).unwrap()
}

fn plan() -> DerivativePlan {
    DerivativePlan::default()
}

#[test]
fn euclidean_example_values() {
    let m = euclidean_model(3, 5.0, 2.0).unwrap();
    let p = Point::new(vec![1.0, 0.0, 0.0]).unwrap();
    assert_eq!(m.potential_at(p.coords()), 2.0);
    assert!(christoffel(&m, &p, &plan()).unwrap().max_abs() == 0.0);
    let (rm, _, r) = riemann_ricci_scalar(&m, &p, &plan()).unwrap();
    assert!(rm.max_abs() == 0.0 && r == 0.0);
    assert!(vstatic_residuals(&m, &p, &plan()).unwrap().main_norm < 1e-14);
}

#[test]
fn space_form_curvatures() {
    let s3 = sphere_model(3, 1.0, 1.0).unwrap();
    let h4 = hyperbolic_model(4, 1.0, 1.0).unwrap();
    let p = at(&s3, 0.3);
    let (_, ric, r) = riemann_ricci_scalar(&s3, &p, &plan()).unwrap();
    let g = s3.metric_at(p.coords()).unwrap().as_tensor();
    assert!(ric.sub(&g.scaled(2.0)).max_abs() < 1e-10 && (r - 6.0).abs() < 1e-10);
    let pk = vstatic_core::curvature::curvature_packet(&s3, &p, &plan()).unwrap();
    assert!(pk.schouten.sub(&g.scaled(0.5)).max_abs() < 1e-10);

    let q = at(&h4, 0.3);
    let (_, ric, r) = riemann_ricci_scalar(&h4, &q, &plan()).unwrap();
    let g = h4.metric_at(q.coords()).unwrap().as_tensor();
    assert!(ric.sub(&g.scaled(-3.0)).max_abs() < 1e-9 && (r + 12.0).abs() < 1e-9);
}

#[test]
fn sphere_gradient_norm() {
    let (a, n) = (2.0, 4);
    let m = sphere_model(n, a, 1.0).unwrap();
    let p = at(&m, 0.4);
    let probe = level_set_probe(&m, &p, &plan()).unwrap();
    let r = p.coords()[0];
    assert!((probe.grad_norm - a * r.sin() / (n as f64 - 1.0)).abs() < 1e-12);
}

#[test]
fn warped_christoffel_and_flat_polar_chart() {
    let s3 = WarpedFiberSpec::round_sphere(3);
    let m = generic_warped_model(4, shared(Sine { amp: 1.0, freq: 1.0 }), (0.5, 2.6), &s3, None).unwrap();
    let p = at(&m, 0.3);
    let x = p.coords();
    let gamma = christoffel(&m, &p, &plan()).unwrap();
    let n = 4;
    // Γ^r_{αβ} = -φφ' g0_{αβ}, with g0 = diag(1, sin²θ1, sin²θ1 sin²θ2)
    let g0 = [1.0, x[1].sin().powi(2), (x[1].sin() * x[2].sin()).powi(2)];
    for (a, g0a) in g0.iter().enumerate() {
        let want = -x[0].sin() * x[0].cos() * g0a;
        assert!((gamma.data()[(a + 1) * n + a + 1] - want).abs() < 1e-12);
    }

    let flat = generic_warped_model(4, shared(Linear { slope: 1.0, offset: 0.0 }), (0.5, 2.5), &s3, None).unwrap();
    let (rm, _, _) = riemann_ricci_scalar(&flat, &at(&flat, 0.3), &plan()).unwrap();
    assert!(rm.max_abs() < 1e-10);

    let h3 = WarpedFiberSpec::hyperbolic(3);
    let hyp = generic_warped_model(4, shared(HypCosine { amp: 1.0, freq: 1.0 }), (-1.5, 1.5), &h3, None).unwrap();
    let q = at(&hyp, 0.3);
    let (_, ric, _) = riemann_ricci_scalar(&hyp, &q, &plan()).unwrap();
    let g = hyp.metric_at(q.coords()).unwrap().as_tensor();
    assert!(ric.sub(&g.scaled(-3.0)).max_abs() < 1e-9);
}

#[test]
fn einstein_fiber_pair_has_weyl_curvature() {
    let m = cosh_warped_model(5, 1.0, 1.0, &WarpedFiberSpec::hyperbolic_plane_pair(-3.0)).unwrap();
    let p = at(&m, 0.35);
    let plan = plan();
    let geo = Geometry::new(&m, &plan);
    let metric = geo.metric(p.coords());
    assert!(norm(&geo.weyl(p.coords()), &metric) > 0.1);
    let (_, ric, _) = riemann_ricci_scalar(&m, &p, &plan).unwrap();
    assert!(ric.sub(&metric.as_tensor().scaled(-4.0)).max_abs() < 1e-9);
}

#[test]
fn cosh_warped_level_sets() {
    let m = cosh_warped_model(4, 1.0, 1.0, &WarpedFiberSpec::hyperbolic(3)).unwrap();
    let mut x = at(&m, 0.3).coords().to_vec();
    x[0] = 1.0;
    let probe = level_set_probe(&m, &Point::new(x).unwrap(), &plan()).unwrap();
    assert!((probe.mean_curv.abs() - 3.0 * 1f64.tanh()).abs() < 1e-10);
    assert!(probe.umbilicity_dev < 1e-10);
}

// T only sees Ric through its traceless part, so on an Einstein metric it
// vanishes for every potential; the pair is caught by the static equation.
#[test]
fn cos_squared_pair_is_not_vstatic() {
    let m = sphere_cos_squared_pair(4).unwrap();
    let p = at(&m, 0.3);
    let geo_tol = Geometry::new(&m, &plan()).tol(0);
    assert!(t_tensor(&m, &p, &plan()).unwrap().norm_sq.sqrt() < geo_tol);
    assert!(vstatic_residuals(&m, &p, &plan()).unwrap().main_norm > 10.0 * geo_tol);
}

#[test]
fn three_dimensional_bach_identities_vanish_on_space_forms() {
    let plan = plan();
    for m in [sphere_model(3, 1.0, 1.0).unwrap(), hyperbolic_model(3, 1.0, 1.0).unwrap(), euclidean_model(3, 1.0, 1.0).unwrap()] {
        let p = at(&m, 0.35);
        let tol = Geometry::new(&m, &plan).tol(3) * m.scale;
        let (first, second) = dim3_bach_identity(&m, &p, &plan).unwrap();
        assert!(first.abs() < tol && second.abs() < tol, "{}: {first:e} {second:e}", m.name);
    }
    let s4 = sphere_model(4, 1.0, 1.0).unwrap();
    assert!(dim3_bach_identity(&s4, &at(&s4, 0.3), &plan).is_err());
}
