//! Pointwise residuals of the V-static system and of the identities it
//! implies, plus the geometry of regular level sets of the potential.

use serde::Serialize;

use crate::curvature::{Geometry, LocalCurvature};
use crate::error::{GeomError, Result};
use crate::fd::DerivativePlan;
use crate::model::MetricModel;
use crate::tensor::{
    contract_vector, full_norm_sq, metric_contract, norm, trace, traceless_part, MetricAtPoint, Point, Symmetry,
    TensorComponents,
};

/// Below this `|∇f|` a point is treated as critical.
pub const REGULAR_THRESHOLD: f64 = 1e-8;

/// Curvature and potential data at one point.
#[derive(Debug, Clone)]
pub struct PointData {
    pub local: LocalCurvature,
    pub f: f64,
    /// `∇_i f`
    pub df: Vec<f64>,
    /// `∇^i f`
    pub grad: Vec<f64>,
    /// `∇_i∇_j f`
    pub hess: TensorComponents,
}

impl PointData {
    pub fn metric(&self) -> &MetricAtPoint {
        &self.local.connection.metric
    }

    pub fn ricci(&self) -> &TensorComponents {
        &self.local.ricci
    }

    pub fn scalar(&self) -> f64 {
        self.local.scalar
    }

    pub fn grad_norm(&self) -> f64 {
        self.metric().inner(&self.df, &self.grad).max(0.0).sqrt()
    }

    pub fn laplacian(&self) -> f64 {
        trace(&self.hess, self.metric())
    }
}

pub fn point_data(geo: &Geometry, x: &[f64]) -> PointData {
    let n = geo.dim();
    let local = geo.local(x);
    let (f, df, ddf) = geo.model.potential.jet(x);
    let conn = &local.connection;
    let mut hess = ddf;
    for i in 0..n {
        for j in 0..n {
            hess[i * n + j] -= (0..n).map(|k| conn.gamma(k, i, j) * df[k]).sum::<f64>();
        }
    }
    let grad = conn.metric.raise_vec(&df);
    let hess = TensorComponents::covariant(n, 2, hess, Symmetry::SymmetricPair);
    PointData { local, f, df, grad, hess }
}

#[derive(Debug, Clone)]
pub struct VStaticResidualSet {
    /// `-(Δf) g + ∇²f - f Ric - κ g`
    pub main: TensorComponents,
    /// `Δf + (fR + κn)/(n-1)`
    pub trace: f64,
    /// `f R̊ic - ∇̊²f`
    pub traceless: TensorComponents,
    pub tol: f64,
    pub main_norm: f64,
    pub traceless_norm: f64,
}

impl VStaticResidualSet {
    /// `tr(main) + (n-1) trace`, zero up to round-off.
    pub fn consistency_defect(&self, m: &MetricAtPoint) -> f64 {
        let n = m.dim() as f64;
        (crate::tensor::trace(&self.main, m) + (n - 1.0) * self.trace).abs()
    }
}

pub fn vstatic_residuals_at(geo: &Geometry, x: &[f64]) -> VStaticResidualSet {
    let n = geo.dim();
    let pd = point_data(geo, x);
    let m = pd.metric();
    let kappa = geo.model.kappa;
    let lap = pd.laplacian();
    let main_data = (0..n * n)
        .map(|k| -(lap + kappa) * m.as_slice()[k] + pd.hess.data()[k] - pd.f * pd.ricci().data()[k])
        .collect();
    let main = TensorComponents::covariant(n, 2, main_data, Symmetry::SymmetricPair);
    let nf = n as f64;
    let trace_res = lap + (pd.f * pd.scalar() + kappa * nf) / (nf - 1.0);
    let traceless = traceless_part(pd.ricci(), m).scaled(pd.f).sub(&traceless_part(&pd.hess, m));
    VStaticResidualSet {
        main_norm: norm(&main, m),
        traceless_norm: norm(&traceless, m),
        main,
        trace: trace_res,
        traceless,
        tol: geo.tol(0),
    }
}

/// `T_ijk`, skew in `(i, j)` and trace-free.
#[derive(Debug, Clone)]
pub struct TTensor {
    pub components: TensorComponents,
    pub norm_sq: f64,
}

fn t_from(pd: &PointData) -> TensorComponents {
    let n = pd.metric().dim();
    let m = pd.metric();
    let nf = n as f64;
    let ric = pd.ricci();
    let r = pd.scalar();
    let df = &pd.df;
    // R_is ∇^s f
    let ric_grad: Vec<f64> = (0..n).map(|i| (0..n).map(|s| ric.get(&[i, s]) * pd.grad[s]).sum()).collect();
    let mut data = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let a = (nf - 1.0) / (nf - 2.0) * (ric.get(&[i, k]) * df[j] - ric.get(&[j, k]) * df[i]);
                let b = r / (nf - 2.0) * (m.g(i, k) * df[j] - m.g(j, k) * df[i]);
                let c = (m.g(i, k) * ric_grad[j] - m.g(j, k) * ric_grad[i]) / (nf - 2.0);
                data[(i * n + j) * n + k] = a - b + c;
            }
        }
    }
    TensorComponents::covariant(n, 3, data, Symmetry::SkewPair)
}

pub fn t_tensor_at(geo: &Geometry, x: &[f64]) -> TTensor {
    let pd = point_data(geo, x);
    let components = t_from(&pd);
    let norm_sq = full_norm_sq(&components, pd.metric());
    TTensor { components, norm_sq }
}

/// `f(∇_iR_jk - ∇_jR_ik) - R_ijkl∇^l f - R/(n-1)(∇_if g_jk - ∇_jf g_ik) + (∇_if R_jk - ∇_jf R_ik)`.
pub fn grad_ricci_identity_at(geo: &Geometry, x: &[f64]) -> TensorComponents {
    let n = geo.dim();
    let pd = point_data(geo, x);
    let m = pd.metric();
    let dric = geo.grad_ricci(x);
    let rm_grad = contract_vector(&pd.local.riemann, 3, &pd.grad);
    let ric = pd.ricci();
    let df = &pd.df;
    let c = pd.scalar() / (n as f64 - 1.0);
    let mut data = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let lhs = pd.f * (dric.get(&[i, j, k]) - dric.get(&[j, i, k]));
                let rhs = rm_grad.get(&[i, j, k]) + c * (df[i] * m.g(j, k) - df[j] * m.g(i, k))
                    - (df[i] * ric.get(&[j, k]) - df[j] * ric.get(&[i, k]));
                data[(i * n + j) * n + k] = lhs - rhs;
            }
        }
    }
    TensorComponents::raw(n, 3, data)
}

/// `f C_ijk - T_ijk - W_ijkl ∇^l f`.
pub fn cotton_identity_at(geo: &Geometry, x: &[f64]) -> CottonIdentityTerms {
    let pd = point_data(geo, x);
    let m = pd.metric();
    let lc = &pd.local;
    let w = crate::curvature::weyl(&lc.riemann, &lc.ricci, lc.scalar, m);
    let fc = geo.cotton(x).scaled(pd.f);
    let t = t_from(&pd);
    let wf = contract_vector(&w, 3, &pd.grad);
    let residual = fc.sub(&t).sub(&wf);
    CottonIdentityTerms {
        fc_norm: norm(&fc, m),
        t_norm: norm(&t, m),
        w_grad_norm: norm(&wf, m),
        weyl_norm: norm(&w, m),
        residual_norm: norm(&residual, m),
        residual,
    }
}

#[derive(Debug, Clone)]
pub struct CottonIdentityTerms {
    pub residual: TensorComponents,
    pub residual_norm: f64,
    pub fc_norm: f64,
    pub t_norm: f64,
    pub w_grad_norm: f64,
    pub weyl_norm: f64,
}

/// Two sides of a scalar identity.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScalarIdentity {
    pub lhs: f64,
    pub rhs: f64,
}

impl ScalarIdentity {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

/// Divergence of the covector field `field` at `x`.
fn divergence<F>(geo: &Geometry, field: &F, x: &[f64], depth: usize) -> f64
where
    F: Fn(&[f64]) -> TensorComponents,
{
    let m = geo.metric(x);
    let dv = geo.covariant_derivative(field, x, depth);
    trace(&dv, &m)
}

/// `div(R̊ic(∇f))` against `f|R̊ic|²`.
pub fn divergence_identity_at(geo: &Geometry, x: &[f64]) -> ScalarIdentity {
    let field = |y: &[f64]| {
        let pd = point_data(geo, y);
        let tl = traceless_part(pd.ricci(), pd.metric());
        contract_vector(&tl, 1, &pd.grad)
    };
    let lhs = divergence(geo, &field, x, 1);
    let pd = point_data(geo, x);
    let tl = traceless_part(pd.ricci(), pd.metric());
    ScalarIdentity { lhs, rhs: pd.f * full_norm_sq(&tl, pd.metric()) }
}

/// `(n-2) f² B(∇f,∇f)` against `∇_k(f T_kij ∇^if ∇^jf) - (n-2)/(2(n-1)) f²|T|²`.
pub fn bach_flux_at(geo: &Geometry, x: &[f64]) -> Result<BachFluxTerms> {
    let n = geo.dim();
    if n < 4 {
        return Err(GeomError::InvalidParameter("the Bach identity for T needs n >= 4".into()));
    }
    let nf = n as f64;
    let pd = point_data(geo, x);
    let m = pd.metric();
    let bach = geo.bach_from_weyl(x)?;
    let b_ff = contract_vector(&contract_vector(&bach, 1, &pd.grad), 0, &pd.grad).data()[0];
    let field = |y: &[f64]| {
        let q = point_data(geo, y);
        let t = t_from(&q);
        let v = contract_vector(&contract_vector(&t, 2, &q.grad), 1, &q.grad);
        v.scaled(q.f)
    };
    let div = divergence(geo, &field, x, 1);
    let t = t_from(&pd);
    let t_sq = full_norm_sq(&t, m);
    let f2 = pd.f * pd.f;
    Ok(BachFluxTerms {
        identity: ScalarIdentity { lhs: (nf - 2.0) * f2 * b_ff, rhs: div - (nf - 2.0) / (2.0 * (nf - 1.0)) * f2 * t_sq },
        magnitude: ((nf - 2.0) * f2 * b_ff).abs() + div.abs() + ((nf - 2.0) / (2.0 * (nf - 1.0)) * f2 * t_sq).abs(),
        bach_grad_grad: b_ff,
        divergence: div,
        t_norm_sq: t_sq,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BachFluxTerms {
    pub identity: ScalarIdentity,
    /// Sum of the absolute values of the three terms.
    pub magnitude: f64,
    pub bach_grad_grad: f64,
    pub divergence: f64,
    pub t_norm_sq: f64,
}

impl BachFluxTerms {
    /// Residual relative to the term sizes once they exceed one.
    pub fn scaled_residual(&self) -> f64 {
        self.identity.residual() / self.magnitude.max(1.0)
    }
}

/// `(div B(∇f) - f|C|²/4, ∇^iB_ij∇^jf + R^ik C_jki ∇^jf)` in dimension three.
pub fn dim3_bach_identity_at(geo: &Geometry, x: &[f64]) -> Result<(f64, f64)> {
    let n = geo.dim();
    if n != 3 {
        return Err(GeomError::InvalidParameter(format!("dimension-three Bach identities need n = 3 (got {n})")));
    }
    let field = |y: &[f64]| {
        let q = point_data(geo, y);
        contract_vector(&geo.bach_dim3(y), 1, &q.grad)
    };
    let div_bf = divergence(geo, &field, x, 3);
    let pd = point_data(geo, x);
    let m = pd.metric();
    let c = geo.cotton(x);
    let first = div_bf - pd.f / 4.0 * full_norm_sq(&c, m);

    let db = geo.covariant_derivative(&|y: &[f64]| geo.bach_dim3(y), x, 3);
    let div_b = metric_contract(&db, 0, 1, m);
    let lhs: f64 = (0..n).map(|j| div_b.get(&[j]) * pd.grad[j]).sum();
    let ric_up = pd.ricci().raised_all(m);
    let mut rc = 0.0;
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                rc += ric_up.get(&[i, k]) * c.get(&[j, k, i]) * pd.grad[j];
            }
        }
    }
    Ok((first, lhs + rc))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ParallelRicciProbe {
    pub grad_ric_norm: f64,
    /// `κ n/(n-1) (|Ric|² - R²/n)`
    pub obstruction: f64,
    /// `|Ric|² - R²/n`
    pub traceless_ricci_sq: f64,
}

pub fn parallel_ricci_at(geo: &Geometry, x: &[f64]) -> ParallelRicciProbe {
    let n = geo.dim() as f64;
    let lc = geo.local(x);
    let m = &lc.connection.metric;
    let dric = geo.grad_ricci(x);
    let tl = full_norm_sq(&lc.ricci, m) - lc.scalar * lc.scalar / n;
    ParallelRicciProbe {
        grad_ric_norm: norm(&dric, m),
        obstruction: geo.model.kappa * n / (n - 1.0) * tl,
        traceless_ricci_sq: tl,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelSetProbe {
    /// `∇f/|∇f|` as a vector.
    pub e1: Vec<f64>,
    pub tangent_frame: Vec<Vec<f64>>,
    /// `h_αβ` in the tangent frame, row-major.
    pub second_fund: Vec<f64>,
    pub mean_curv: f64,
    pub umbilicity_dev: f64,
    pub grad_norm_tangential_variation: f64,
    pub mixed_ricci: f64,
    /// `max |R(e1, e_α, e_β, e_γ)|`
    pub mixed_riemann: f64,
    pub grad_norm: f64,
}

/// Orthonormal frame of `e1^⊥` from the coordinate vectors, dropping the one
/// most aligned with `e1`.
pub fn tangent_frame(m: &MetricAtPoint, e1: &[f64]) -> Vec<Vec<f64>> {
    let n = m.dim();
    let e1_low = m.lower_vec(e1);
    let drop = (0..n)
        .map(|i| e1_low[i].abs() / m.g(i, i).sqrt())
        .enumerate()
        .fold((0, f64::MIN), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc })
        .0;
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    for i in (0..n).filter(|&i| i != drop) {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        // modified Gram-Schmidt, twice for stability
        for _ in 0..2 {
            for u in std::iter::once(e1).chain(frame.iter().map(|u| u.as_slice())) {
                let c = m.inner(&v, u);
                v.iter_mut().zip(u).for_each(|(a, b)| *a -= c * b);
            }
        }
        let len = m.inner(&v, &v).sqrt();
        v.iter_mut().for_each(|a| *a /= len);
        frame.push(v);
    }
    frame
}

fn eval2(t: &TensorComponents, u: &[f64], v: &[f64]) -> f64 {
    let n = t.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += t.data()[i * n + j] * u[i] * v[j];
        }
    }
    s
}

pub fn level_set_probe_at(geo: &Geometry, x: &[f64]) -> Result<LevelSetProbe> {
    let pd = point_data(geo, x);
    let m = pd.metric();
    let gn = pd.grad_norm();
    if !(gn > REGULAR_THRESHOLD) {
        return Err(GeomError::CriticalPoint { grad_norm: gn });
    }
    let e1: Vec<f64> = pd.grad.iter().map(|v| v / gn).collect();
    let frame = tangent_frame(m, &e1);
    let k = frame.len();
    let mut h = vec![0.0; k * k];
    for a in 0..k {
        for b in 0..k {
            h[a * k + b] = eval2(&pd.hess, &frame[a], &frame[b]) / gn;
        }
    }
    let mean: f64 = (0..k).map(|a| h[a * k + a]).sum();
    let mut dev = 0.0;
    for a in 0..k {
        for b in 0..k {
            let target = if a == b { mean / k as f64 } else { 0.0 };
            dev += (h[a * k + b] - target).powi(2);
        }
    }
    // e_α |∇f| = ∇²f(e_α, e1)
    let variation = frame.iter().map(|e| eval2(&pd.hess, e, &e1).abs()).fold(0.0, f64::max);
    let mixed_ricci = frame.iter().map(|e| eval2(pd.ricci(), &e1, e).abs()).fold(0.0, f64::max);
    let rm1 = contract_vector(&pd.local.riemann, 0, &e1);
    let mut mixed_riemann = 0.0f64;
    for a in &frame {
        let r2 = contract_vector(&rm1, 0, a);
        for b in &frame {
            let r3 = contract_vector(&r2, 0, b);
            for c in &frame {
                let v: f64 = r3.data().iter().zip(c).map(|(p, q)| p * q).sum();
                mixed_riemann = mixed_riemann.max(v.abs());
            }
        }
    }
    Ok(LevelSetProbe {
        e1,
        tangent_frame: frame,
        second_fund: h,
        mean_curv: mean,
        umbilicity_dev: dev.sqrt(),
        grad_norm_tangential_variation: variation,
        mixed_ricci,
        mixed_riemann,
        grad_norm: gn,
    })
}

fn entry<'a>(model: &'a MetricModel, p: &Point, plan: &'a DerivativePlan, depth: usize) -> Result<Geometry<'a>> {
    plan.validate()?;
    let geo = Geometry::new(model, plan);
    geo.check_point(p.coords(), depth)?;
    Ok(geo)
}

pub fn vstatic_residuals(model: &MetricModel, p: &Point, plan: &DerivativePlan) -> Result<VStaticResidualSet> {
    Ok(vstatic_residuals_at(&entry(model, p, plan, 0)?, p.coords()))
}

pub fn t_tensor(model: &MetricModel, p: &Point, plan: &DerivativePlan) -> Result<TTensor> {
    Ok(t_tensor_at(&entry(model, p, plan, 0)?, p.coords()))
}

pub fn grad_ricci_identity_residual(model: &MetricModel, p: &Point, plan: &DerivativePlan) -> Result<TensorComponents> {
    Ok(grad_ricci_identity_at(&entry(model, p, plan, 1)?, p.coords()))
}

pub fn cotton_identity_residual(model: &MetricModel, p: &Point, plan: &DerivativePlan) -> Result<TensorComponents> {
    Ok(cotton_identity_at(&entry(model, p, plan, 1)?, p.coords()).residual)
}

pub fn divergence_identity_residual(model: &MetricModel, p: &Point, plan: &DerivativePlan) -> Result<f64> {
    Ok(divergence_identity_at(&entry(model, p, plan, 1)?, p.coords()).residual())
}

pub fn bach_flux_residual(model: &MetricModel, p: &Point, plan: &DerivativePlan) -> Result<f64> {
    Ok(bach_flux_at(&entry(model, p, plan, 2)?, p.coords())?.scaled_residual())
}

pub fn dim3_bach_identity(model: &MetricModel, p: &Point, plan: &DerivativePlan) -> Result<(f64, f64)> {
    dim3_bach_identity_at(&entry(model, p, plan, 3)?, p.coords())
}

pub fn parallel_ricci_probe(model: &MetricModel, p: &Point, plan: &DerivativePlan) -> Result<ParallelRicciProbe> {
    Ok(parallel_ricci_at(&entry(model, p, plan, 1)?, p.coords()))
}

pub fn level_set_probe(model: &MetricModel, p: &Point, plan: &DerivativePlan) -> Result<LevelSetProbe> {
    level_set_probe_at(&entry(model, p, plan, 0)?, p.coords())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{euclidean_model, sphere_model};
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn equator_is_totally_geodesic() {
        let model = sphere_model(4, 1.0, 1.0).unwrap();
        let plan = DerivativePlan::default();
        let p = Point::new(vec![FRAC_PI_2, 1.0, 1.2, 0.4]).unwrap();
        let probe = level_set_probe(&model, &p, &plan).unwrap();
        assert_eq!(probe.tangent_frame.len(), 3);
        assert!(probe.mean_curv.abs() < 1e-12);
        assert!(probe.umbilicity_dev < 1e-12);
        assert!((probe.grad_norm - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn off_equator_level_sets_are_umbilic() {
        let model = sphere_model(4, 1.0, 1.0).unwrap();
        let plan = DerivativePlan::default();
        let p = Point::new(vec![1.0, 1.0, 1.2, 0.4]).unwrap();
        let probe = level_set_probe(&model, &p, &plan).unwrap();
        // f = (cos r - 1)/3 so ∇²f/|∇f| = -cot(r) g on the level set
        assert!((probe.mean_curv + 3.0 / 1.0f64.tan()).abs() < 1e-10);
        assert!(probe.umbilicity_dev < 1e-10);
        assert!(probe.mixed_ricci < 1e-10);
    }

    #[test]
    fn tangent_frame_is_orthonormal() {
        let m = MetricAtPoint::new(3, vec![2.0, 0.3, 0.0, 0.3, 1.0, 0.1, 0.0, 0.1, 1.5]).unwrap();
        let raw = [0.2, -0.7, 0.4];
        let len = m.inner(&raw, &raw).sqrt();
        let e1: Vec<f64> = raw.iter().map(|v| v / len).collect();
        let frame = tangent_frame(&m, &e1);
        assert_eq!(frame.len(), 2);
        for (a, u) in frame.iter().enumerate() {
            assert!(m.inner(u, &e1).abs() < 1e-14);
            for (b, v) in frame.iter().enumerate() {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((m.inner(u, v) - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn euclidean_origin_is_critical() {
        let model = euclidean_model(4, 1.0, 1.0).unwrap();
        let plan = DerivativePlan::default();
        let p = Point::new(vec![0.0; 4]).unwrap();
        assert!(matches!(level_set_probe(&model, &p, &plan), Err(GeomError::CriticalPoint { .. })));
    }

    #[test]
    fn space_form_residuals_vanish() {
        let plan = DerivativePlan::default();
        for model in [sphere_model(4, 2.0, 0.5).unwrap(), euclidean_model(3, 1.0, -2.0).unwrap()] {
            let p = Point::new(model.domain.iter().map(|(a, b)| a + 0.4 * (b - a)).collect()).unwrap();
            let set = vstatic_residuals(&model, &p, &plan).unwrap();
            assert!(set.main_norm < 1e-10, "{}: {}", model.name, set.main_norm);
            let m = model.metric_at(p.coords()).unwrap();
            assert!(set.consistency_defect(&m) < 1e-10);
            assert!(t_tensor(&model, &p, &plan).unwrap().norm_sq < 1e-20);
        }
    }
}
