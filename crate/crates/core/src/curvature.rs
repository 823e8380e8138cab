//! Christoffel symbols, curvature tensors and covariant derivatives.
//!
//! Algebraic curvature (Riemann, Ricci, Weyl, Schouten) comes from exact
//! metric derivatives up to order two. Everything involving `∇Ric`, `∇W` and
//! beyond is a Richardson-extrapolated central difference of those exact
//! fields, nested once per extra derivative.

use crate::error::{GeomError, Result};
use crate::fd::{jacobian, DerivativePlan};
use crate::model::{MetricJet, MetricModel};
use crate::tensor::{metric_contract, pow, MetricAtPoint, Point, Symmetry, TensorComponents};
use crate::tolerance::tolerance;

/// Levi-Civita connection data at a point.
#[derive(Debug, Clone)]
pub struct Connection {
    pub metric: MetricAtPoint,
    /// `Γ^k_{ij}` at `[(k*n + i)*n + j]`.
    pub gamma: Vec<f64>,
    /// `Γ_{kij} = g_{kl} Γ^l_{ij}`.
    pub gamma_lower: Vec<f64>,
}

impl Connection {
    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    #[inline]
    pub fn gamma(&self, k: usize, i: usize, j: usize) -> f64 {
        let n = self.dim();
        self.gamma[(k * n + i) * n + j]
    }
}

#[derive(Debug, Clone)]
pub struct CurvaturePacket {
    pub gamma: TensorComponents,
    pub riemann: TensorComponents,
    pub ricci: TensorComponents,
    pub scalar: f64,
    pub weyl: TensorComponents,
    pub schouten: TensorComponents,
    pub cotton: TensorComponents,
    pub bach: TensorComponents,
    /// Accuracy estimate of the most deeply differentiated member (Bach).
    pub tol: f64,
}

/// Pointwise algebraic curvature.
#[derive(Debug, Clone)]
pub struct LocalCurvature {
    pub connection: Connection,
    pub riemann: TensorComponents,
    pub ricci: TensorComponents,
    pub scalar: f64,
}

/// A model paired with a derivative plan. Cheap to copy; all methods are pure.
#[derive(Debug, Clone, Copy)]
pub struct Geometry<'a> {
    pub model: &'a MetricModel,
    pub plan: &'a DerivativePlan,
}

impl<'a> Geometry<'a> {
    pub fn new(model: &'a MetricModel, plan: &'a DerivativePlan) -> Self {
        Geometry { model, plan }
    }

    pub fn dim(&self) -> usize {
        self.model.n
    }

    fn analytic(&self) -> bool {
        self.plan.use_analytic
    }

    /// Step used for a derivative `depth` levels above the algebraic fields.
    pub fn step(&self, depth: usize) -> f64 {
        self.plan.step(depth)
    }

    /// Calibrated tolerance for a quantity `depth` derivatives above the
    /// algebraic curvature.
    pub fn tol(&self, depth: usize) -> f64 {
        tolerance(self.plan, depth + if self.analytic() { 0 } else { 2 }, self.model.scale)
    }

    /// Fails unless the whole stencil of `depth` nested levels stays in the chart.
    pub fn check_point(&self, x: &[f64], depth: usize) -> Result<()> {
        if x.len() != self.dim() {
            return Err(GeomError::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        let margin = self.plan.reach(depth);
        if !self.model.is_interior(x, margin) {
            return Err(GeomError::StencilViolation { coords: x.to_vec(), margin });
        }
        Ok(())
    }

    pub fn metric(&self, x: &[f64]) -> MetricAtPoint {
        self.model.metric_at(x).expect("model metric must be positive definite on its chart")
    }

    pub fn metric_jet(&self, x: &[f64]) -> MetricJet {
        if self.analytic() {
            if let Some(j) = self.model.metric.jet(x) {
                return j;
            }
        }
        let n = self.dim();
        let levels = self.plan.richardson_levels;
        let h1 = self.plan.base_step;
        let h2 = self.plan.base_step;
        let comps = |y: &[f64]| self.model.metric.components(y);
        let first = |y: &[f64]| jacobian(&comps, y, h1, levels).concat();
        let dg = first(x);
        let ddg = jacobian(&first, x, h2, levels).concat();
        MetricJet { n, g: comps(x), dg, ddg }
    }

    pub fn connection(&self, x: &[f64]) -> Connection {
        let jet = self.metric_jet(x);
        connection_from_jet(&jet)
    }

    /// Riemann, Ricci and scalar curvature at `x`.
    pub fn local(&self, x: &[f64]) -> LocalCurvature {
        let jet = self.metric_jet(x);
        let connection = connection_from_jet(&jet);
        let riemann = riemann_from_jet(&jet, &connection);
        let ricci = ricci_from_riemann(&riemann, &connection.metric);
        let scalar = crate::tensor::trace(&ricci, &connection.metric);
        LocalCurvature { connection, riemann, ricci, scalar }
    }

    pub fn ricci(&self, x: &[f64]) -> TensorComponents {
        self.local(x).ricci
    }

    pub fn weyl(&self, x: &[f64]) -> TensorComponents {
        let lc = self.local(x);
        weyl(&lc.riemann, &lc.ricci, lc.scalar, &lc.connection.metric)
    }

    /// `∇T` of a covariant tensor field; the new slot comes first.
    pub fn covariant_derivative<F>(&self, field: &F, x: &[f64], depth: usize) -> TensorComponents
    where
        F: Fn(&[f64]) -> TensorComponents + ?Sized,
    {
        let conn = self.connection(x);
        let t = field(x);
        let raw = |y: &[f64]| field(y).into_data();
        let partials = jacobian(&raw, x, self.step(depth), self.plan.richardson_levels);
        covariant_from_partials(&t, &partials, &conn)
    }

    /// `∇Ric` with layout `[k][i][j] = ∇_k R_ij`.
    pub fn grad_ricci(&self, x: &[f64]) -> TensorComponents {
        self.covariant_derivative(&|y: &[f64]| self.ricci(y), x, 1)
    }

    /// Cotton tensor from derivatives of the Ricci tensor.
    pub fn cotton(&self, x: &[f64]) -> TensorComponents {
        let m = self.metric(x);
        cotton_from_grad_ricci(&self.grad_ricci(x), &m)
    }

    /// Cotton tensor as `-(n-2)/(n-3) ∇_l W_{ijkl}`; `n >= 4`.
    pub fn cotton_from_weyl(&self, x: &[f64]) -> Result<TensorComponents> {
        let n = self.dim();
        if n < 4 {
            return Err(GeomError::InvalidParameter("Weyl route of the Cotton tensor needs n >= 4".into()));
        }
        let m = self.metric(x);
        let dw = self.covariant_derivative(&|y: &[f64]| self.weyl(y), x, 1);
        // dw[l][i][j][k][m]: contract derivative slot with the last Weyl slot
        let div = metric_contract(&dw, 0, 4, &m);
        let c = -(n as f64 - 2.0) / (n as f64 - 3.0);
        Ok(div.scaled(c))
    }

    /// Bach tensor; `∇_k C_{kij}` for `n = 3`, the Weyl form otherwise.
    pub fn bach(&self, x: &[f64]) -> TensorComponents {
        if self.dim() == 3 {
            self.bach_dim3(x)
        } else {
            self.bach_from_weyl(x).expect("n >= 4")
        }
    }

    pub fn bach_dim3(&self, x: &[f64]) -> TensorComponents {
        let m = self.metric(x);
        let dc = self.covariant_derivative(&|y: &[f64]| self.cotton(y), x, 2);
        let b = metric_contract(&dc, 0, 1, &m);
        TensorComponents::covariant(self.dim(), 2, b.into_data(), Symmetry::None)
    }

    /// `B_ij = 1/(n-3) ∇_k∇_l W_ikjl + 1/(n-2) R_kl W_ikjl`.
    pub fn bach_from_weyl(&self, x: &[f64]) -> Result<TensorComponents> {
        let n = self.dim();
        if n < 4 {
            return Err(GeomError::InvalidParameter("Weyl form of the Bach tensor refuses n = 3".into()));
        }
        let lc = self.local(x);
        let m = &lc.connection.metric;
        let w = weyl(&lc.riemann, &lc.ricci, lc.scalar, m);
        let inner = |y: &[f64]| self.covariant_derivative(&|z: &[f64]| self.weyl(z), y, 1);
        let ddw = self.covariant_derivative(&inner, x, 2);
        // ddw[a][b][i][k][j][l]; contract a~k then b~l
        let t = metric_contract(&ddw, 0, 3, m); // [b][i][j][l]
        let t = metric_contract(&t, 0, 3, m); // [i][j]
        let ric_up = lc.ricci.raised_all(m);
        let mut data = vec![0.0; n * n];
        let nf = n as f64;
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    for l in 0..n {
                        s += ric_up.get(&[k, l]) * w.get(&[i, k, j, l]);
                    }
                }
                data[i * n + j] = t.get(&[i, j]) / (nf - 3.0) + s / (nf - 2.0);
            }
        }
        Ok(TensorComponents::raw(n, 2, data))
    }

    /// Both sides of `(div Rm)_{jkl} = ∇_k R_jl - ∇_l R_jk`.
    pub fn div_riemann(&self, x: &[f64]) -> (TensorComponents, TensorComponents) {
        let n = self.dim();
        let m = self.metric(x);
        let drm = self.covariant_derivative(&|y: &[f64]| self.local(y).riemann, x, 1);
        let lhs = metric_contract(&drm, 0, 1, &m);
        let dric = self.grad_ricci(x);
        let mut rhs = vec![0.0; n * n * n];
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    rhs[(j * n + k) * n + l] = dric.get(&[k, j, l]) - dric.get(&[l, j, k]);
                }
            }
        }
        (lhs, TensorComponents::raw(n, 3, rhs))
    }

    /// Everything at once, Cotton from the Ricci route.
    pub fn packet(&self, x: &[f64]) -> CurvaturePacket {
        let n = self.dim();
        let lc = self.local(x);
        let m = &lc.connection.metric;
        let w = weyl(&lc.riemann, &lc.ricci, lc.scalar, m);
        let a = schouten(&lc.ricci, lc.scalar, m);
        let gamma = TensorComponents::raw(n, 3, lc.connection.gamma.clone());
        CurvaturePacket {
            gamma,
            riemann: lc.riemann,
            ricci: lc.ricci,
            scalar: lc.scalar,
            weyl: w,
            schouten: a,
            cotton: self.cotton(x),
            bach: self.bach(x),
            tol: self.tol(2),
        }
    }
}

pub fn connection_from_jet(jet: &MetricJet) -> Connection {
    let n = jet.n;
    let metric = MetricAtPoint::new(n, jet.g.clone()).expect("metric must be positive definite");
    let dg = |a: usize, i: usize, j: usize| jet.dg[(a * n + i) * n + j];
    let mut lower = vec![0.0; n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                lower[(k * n + i) * n + j] = 0.5 * (dg(i, k, j) + dg(j, k, i) - dg(k, i, j));
            }
        }
    }
    let mut gamma = vec![0.0; n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                gamma[(k * n + i) * n + j] = (0..n).map(|l| metric.inv(k, l) * lower[(l * n + i) * n + j]).sum();
            }
        }
    }
    Connection { metric, gamma, gamma_lower: lower }
}

/// `R_{ijkl}` normalised so that the unit sphere has `R_ijkl = g_ik g_jl - g_il g_jk`.
pub fn riemann_from_jet(jet: &MetricJet, conn: &Connection) -> TensorComponents {
    let n = jet.n;
    let dd = |a: usize, b: usize, i: usize, j: usize| jet.ddg[((a * n + b) * n + i) * n + j];
    let gl = |k: usize, i: usize, j: usize| conn.gamma_lower[(k * n + i) * n + j];
    let mut data = vec![0.0; pow(n, 4)];
    for r in 0..n {
        for s in 0..n {
            for mu in 0..n {
                for nu in 0..n {
                    let second = 0.5 * (dd(s, mu, r, nu) + dd(r, nu, s, mu) - dd(s, nu, r, mu) - dd(r, mu, s, nu));
                    let mut quad = 0.0;
                    for l in 0..n {
                        quad += conn.gamma(l, s, mu) * gl(l, r, nu) - conn.gamma(l, s, nu) * gl(l, r, mu);
                    }
                    data[((r * n + s) * n + mu) * n + nu] = second + quad;
                }
            }
        }
    }
    TensorComponents::covariant(n, 4, data, Symmetry::RiemannType)
}

/// `R_jl = g^{ik} R_ijkl`.
pub fn ricci_from_riemann(rm: &TensorComponents, m: &MetricAtPoint) -> TensorComponents {
    let ric = metric_contract(rm, 0, 2, m);
    TensorComponents::covariant(rm.dim(), 2, ric.into_data(), Symmetry::SymmetricPair)
}

/// Weyl tensor from the explicit decomposition; zero for `n = 3`.
pub fn weyl(rm: &TensorComponents, ric: &TensorComponents, scalar: f64, m: &MetricAtPoint) -> TensorComponents {
    let n = rm.dim();
    if n <= 3 {
        return TensorComponents::covariant(n, 4, vec![0.0; pow(n, 4)], Symmetry::RiemannType);
    }
    let nf = n as f64;
    let r = |i: usize, j: usize| ric.data()[i * n + j];
    let g = |i: usize, j: usize| m.g(i, j);
    let mut data = rm.data().to_vec();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let ricci_part = (r(i, k) * g(j, l) + r(j, l) * g(i, k) - r(i, l) * g(j, k) - r(j, k) * g(i, l)) / (nf - 2.0);
                    let scalar_part = scalar / ((nf - 1.0) * (nf - 2.0)) * (g(j, l) * g(i, k) - g(i, l) * g(j, k));
                    data[((i * n + j) * n + k) * n + l] -= ricci_part - scalar_part;
                }
            }
        }
    }
    TensorComponents::covariant(n, 4, data, Symmetry::RiemannType)
}

/// `A_ij = R_ij - R/(2(n-1)) g_ij`.
pub fn schouten(ric: &TensorComponents, scalar: f64, m: &MetricAtPoint) -> TensorComponents {
    let n = ric.dim();
    let c = scalar / (2.0 * (n as f64 - 1.0));
    let data = (0..n * n).map(|k| ric.data()[k] - c * m.as_slice()[k]).collect();
    TensorComponents::covariant(n, 2, data, Symmetry::SymmetricPair)
}

/// `C_ijk = ∇_iR_jk - ∇_jR_ik - (∇_iR g_jk - ∇_jR g_ik)/(2(n-1))`.
pub fn cotton_from_grad_ricci(dric: &TensorComponents, m: &MetricAtPoint) -> TensorComponents {
    let n = dric.dim();
    // ∇_i R = g^{jk} ∇_i R_jk
    let dr = metric_contract(dric, 1, 2, m);
    let c = 1.0 / (2.0 * (n as f64 - 1.0));
    let mut data = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                data[(i * n + j) * n + k] = dric.get(&[i, j, k]) - dric.get(&[j, i, k])
                    - c * (dr.get(&[i]) * m.g(j, k) - dr.get(&[j]) * m.g(i, k));
            }
        }
    }
    TensorComponents::covariant(n, 3, data, Symmetry::SkewPair)
}

/// Adds the connection terms to coordinate partials; `partials[a]` is
/// `∂_a` of the component array.
pub fn covariant_from_partials(t: &TensorComponents, partials: &[Vec<f64>], conn: &Connection) -> TensorComponents {
    let n = t.dim();
    let r = t.rank();
    let len = pow(n, r);
    let mut out = vec![0.0; n * len];
    for a in 0..n {
        let block = &mut out[a * len..(a + 1) * len];
        block.copy_from_slice(&partials[a]);
        for s in 0..r {
            let stride = pow(n, r - 1 - s);
            for (idx, o) in block.iter_mut().enumerate() {
                let i = idx / stride % n;
                let base = idx - i * stride;
                let mut corr = 0.0;
                for m in 0..n {
                    corr += conn.gamma(m, a, i) * t.data()[base + m * stride];
                }
                *o -= corr;
            }
        }
    }
    TensorComponents::raw(n, r + 1, out)
}

fn entry(model: &MetricModel, p: &Point, plan: &DerivativePlan, depth: usize) -> Result<()> {
    plan.validate()?;
    Geometry::new(model, plan).check_point(p.coords(), depth)
}

/// `Γ^k_{ij}` at `p`.
pub fn christoffel(model: &MetricModel, p: &Point, plan: &DerivativePlan) -> Result<TensorComponents> {
    entry(model, p, plan, 0)?;
    let conn = Geometry::new(model, plan).connection(p.coords());
    Ok(TensorComponents::raw(model.n, 3, conn.gamma))
}

pub fn riemann_ricci_scalar(
    model: &MetricModel,
    p: &Point,
    plan: &DerivativePlan,
) -> Result<(TensorComponents, TensorComponents, f64)> {
    entry(model, p, plan, 0)?;
    let lc = Geometry::new(model, plan).local(p.coords());
    Ok((lc.riemann, lc.ricci, lc.scalar))
}

/// `∇` of a covariant tensor field evaluable around `p`.
pub fn covariant_derivative<F>(field: &F, model: &MetricModel, p: &Point, plan: &DerivativePlan) -> Result<TensorComponents>
where
    F: Fn(&[f64]) -> TensorComponents + ?Sized,
{
    entry(model, p, plan, 1)?;
    Ok(Geometry::new(model, plan).covariant_derivative(field, p.coords(), 1))
}

pub fn cotton(model: &MetricModel, p: &Point, plan: &DerivativePlan) -> Result<TensorComponents> {
    entry(model, p, plan, 1)?;
    Ok(Geometry::new(model, plan).cotton(p.coords()))
}

pub fn bach(model: &MetricModel, p: &Point, plan: &DerivativePlan) -> Result<TensorComponents> {
    entry(model, p, plan, 2)?;
    Ok(Geometry::new(model, plan).bach(p.coords()))
}

pub fn div_riemann(model: &MetricModel, p: &Point, plan: &DerivativePlan) -> Result<(TensorComponents, TensorComponents)> {
    entry(model, p, plan, 1)?;
    Ok(Geometry::new(model, plan).div_riemann(p.coords()))
}

pub fn curvature_packet(model: &MetricModel, p: &Point, plan: &DerivativePlan) -> Result<CurvaturePacket> {
    entry(model, p, plan, 2)?;
    Ok(Geometry::new(model, plan).packet(p.coords()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{cosh_warped_model, doubly_warped_model, sphere_model, WarpedFiberSpec};
    use crate::tensor::{kulkarni_nomizu, norm};

    fn mid(model: &MetricModel) -> Vec<f64> {
        model.domain.iter().enumerate().map(|(i, (a, b))| a + (b - a) * (0.37 + 0.05 * i as f64)).collect()
    }

    #[test]
    fn round_s2_christoffel() {
        let s2 = WarpedFiberSpec::round_sphere(2).as_model();
        let plan = DerivativePlan::default();
        let th = 1.1;
        let p = Point::new(vec![th, 0.3]).unwrap();
        let g = christoffel(&s2, &p, &plan).unwrap();
        let at = |k: usize, i: usize, j: usize| g.data()[(k * 2 + i) * 2 + j];
        assert!((at(0, 1, 1) + th.sin() * th.cos()).abs() < 1e-12);
        assert!((at(1, 0, 1) - th.cos() / th.sin()).abs() < 1e-12);
        assert!((at(1, 1, 0) - th.cos() / th.sin()).abs() < 1e-12);
        assert!(at(0, 0, 0).abs() < 1e-14 && at(1, 1, 1).abs() < 1e-14);
    }

    #[test]
    fn unit_spheres_have_constant_curvature() {
        let plan = DerivativePlan::default();
        for n in 3..=6 {
            let model = sphere_model(n, 1.0, 1.0).unwrap();
            let x = mid(&model);
            let lc = Geometry::new(&model, &plan).local(&x);
            let m = Geometry::new(&model, &plan).metric(&x);
            let expect = (n * (n - 1)) as f64;
            assert!((lc.scalar - expect).abs() < 1e-10, "n={n} R={}", lc.scalar);
            let g = m.as_tensor();
            let form = kulkarni_nomizu(&g, &g).unwrap().scaled(0.5);
            assert!(lc.riemann.sub(&form).max_abs() < 1e-10);
        }
    }

    #[test]
    fn conformally_flat_sphere_has_no_higher_curvature() {
        let plan = DerivativePlan::default();
        let model = sphere_model(4, 1.0, 1.0).unwrap();
        let geo = Geometry::new(&model, &plan);
        let x = mid(&model);
        let m = geo.metric(&x);
        let pk = geo.packet(&x);
        assert!(norm(&pk.weyl, &m) < geo.tol(0));
        assert!(norm(&pk.cotton, &m) < geo.tol(1));
        assert!(norm(&pk.bach, &m) < geo.tol(2));
        // Ric = 3g and R = 12, so Ric - R g / 6 = g.
        assert!(pk.schouten.sub(&m.as_tensor()).max_abs() < 1e-10);
        let (lhs, rhs) = geo.div_riemann(&x);
        assert!(norm(&lhs.sub(&rhs), &m) < geo.tol(1));
    }

    #[test]
    fn cotton_routes_agree() {
        let plan = DerivativePlan::default();
        let model = doubly_warped_model();
        let geo = Geometry::new(&model, &plan);
        let x = mid(&model);
        let m = geo.metric(&x);
        let c1 = geo.cotton(&x);
        let c2 = geo.cotton_from_weyl(&x).unwrap();
        assert!(norm(&c1, &m) > 1e-3);
        assert!(norm(&c1.sub(&c2), &m) < 1e-6 * norm(&c1, &m));
    }

    #[test]
    fn cotton_from_weyl_needs_four_dimensions() {
        let plan = DerivativePlan::default();
        let model = sphere_model(3, 1.0, 1.0).unwrap();
        assert!(Geometry::new(&model, &plan).cotton_from_weyl(&mid(&model)).is_err());
    }

    #[test]
    fn einstein_warped_bach_vanishes() {
        let plan = DerivativePlan::default();
        let model = cosh_warped_model(5, 1.0, 1.0, &WarpedFiberSpec::hyperbolic_plane_pair(-3.0)).unwrap();
        let geo = Geometry::new(&model, &plan);
        let x = mid(&model);
        let m = geo.metric(&x);
        assert!(norm(&geo.bach(&x), &m) < geo.tol(2) * model.scale);
    }

    #[test]
    fn stencil_violation_near_boundary() {
        let plan = DerivativePlan::default();
        let model = sphere_model(4, 1.0, 1.0).unwrap();
        let mut x = mid(&model);
        x[0] = model.domain[0].0 + 1e-4;
        let p = Point::new(x).unwrap();
        assert!(matches!(bach(&model, &p, &plan), Err(GeomError::StencilViolation { .. })));
        assert!(christoffel(&model, &p, &plan).is_ok());
    }
}
