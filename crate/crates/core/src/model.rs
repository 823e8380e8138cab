//! Closed-form charts of the V-static and static-vacuum example metrics.
//!
//! Every catalog metric is diagonal in its chart, with each diagonal entry a
//! constant times a product of squared one-variable profiles. That covers
//! Cartesian space, geodesic polar charts of space forms, warped products and
//! Riemannian products, and gives exact first and second metric derivatives.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt::Debug;
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{GeomError, Result};
use crate::profile::{shared, Constant, Cosine, HypCosine, HypSine, Linear, SharedProfile, Sine};
use crate::tensor::MetricAtPoint;

/// Metric components with exact coordinate derivatives.
#[derive(Debug, Clone)]
pub struct MetricJet {
    pub n: usize,
    /// `g[i*n + j]`
    pub g: Vec<f64>,
    /// `dg[(a*n + i)*n + j] = ∂_a g_ij`
    pub dg: Vec<f64>,
    /// `ddg[((a*n + b)*n + i)*n + j] = ∂_a ∂_b g_ij`
    pub ddg: Vec<f64>,
}

pub trait MetricField: Send + Sync + Debug {
    fn dim(&self) -> usize;
    fn components(&self, x: &[f64]) -> Vec<f64>;
    /// Closed-form derivatives when available.
    fn jet(&self, _x: &[f64]) -> Option<MetricJet> {
        None
    }
}

/// Potential function with its coordinate gradient and Hessian.
pub trait ScalarField: Send + Sync + Debug {
    /// `(f, ∂f, ∂∂f)` with the Hessian row-major.
    fn jet(&self, x: &[f64]) -> (f64, Vec<f64>, Vec<f64>);

    fn value(&self, x: &[f64]) -> f64 {
        self.jet(x).0
    }
}

/// `offset + scale * profile(x[axis])`
#[derive(Debug, Clone)]
pub struct AxisPotential {
    pub n: usize,
    pub axis: usize,
    pub offset: f64,
    pub scale: f64,
    pub profile: SharedProfile,
}

impl ScalarField for AxisPotential {
    fn jet(&self, x: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
        let n = self.n;
        let [p, dp, ddp] = self.profile.jet(x[self.axis]);
        let mut grad = vec![0.0; n];
        let mut hess = vec![0.0; n * n];
        grad[self.axis] = self.scale * dp;
        hess[self.axis * n + self.axis] = self.scale * ddp;
        (self.offset + self.scale * p, grad, hess)
    }
}

/// `offset + coef * |x|^2` in Cartesian coordinates.
#[derive(Debug, Clone)]
pub struct RadialQuadratic {
    pub n: usize,
    pub offset: f64,
    pub coef: f64,
}

impl ScalarField for RadialQuadratic {
    fn jet(&self, x: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
        let n = self.n;
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let grad = x.iter().map(|v| 2.0 * self.coef * v).collect();
        let mut hess = vec![0.0; n * n];
        for i in 0..n {
            hess[i * n + i] = 2.0 * self.coef;
        }
        (self.offset + self.coef * r2, grad, hess)
    }
}

#[derive(Debug, Clone)]
pub struct SumPotential(pub Vec<Arc<dyn ScalarField>>);

impl ScalarField for SumPotential {
    fn jet(&self, x: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
        let mut it = self.0.iter();
        let first = it.next().expect("empty potential sum");
        let (mut f, mut g, mut h) = first.jet(x);
        for p in it {
            let (f2, g2, h2) = p.jet(x);
            f += f2;
            g.iter_mut().zip(g2).for_each(|(a, b)| *a += b);
            h.iter_mut().zip(h2).for_each(|(a, b)| *a += b);
        }
        (f, g, h)
    }
}

/// `factor * base`
#[derive(Debug, Clone)]
pub struct ScaledPotential {
    pub factor: f64,
    pub base: Arc<dyn ScalarField>,
}

impl ScalarField for ScaledPotential {
    fn jet(&self, x: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
        let (f, g, h) = self.base.jet(x);
        let s = self.factor;
        (s * f, g.into_iter().map(|v| s * v).collect(), h.into_iter().map(|v| s * v).collect())
    }
}

/// One diagonal entry `constant * prod_f profile_f(x[coord_f])^2`.
#[derive(Debug, Clone)]
pub struct DiagEntry {
    pub constant: f64,
    pub factors: Vec<(usize, SharedProfile)>,
}

impl DiagEntry {
    fn constant(c: f64) -> Self {
        DiagEntry { constant: c, factors: Vec::new() }
    }

    fn shifted(&self, offset: usize) -> Self {
        DiagEntry {
            constant: self.constant,
            factors: self.factors.iter().map(|(a, p)| (a + offset, p.clone())).collect(),
        }
    }

    /// Value, gradient and Hessian of the entry (`n` coordinates).
    fn jet(&self, x: &[f64], n: usize) -> (f64, Vec<f64>, Vec<f64>) {
        let m = self.factors.len();
        // u = w^2 and its derivatives for each factor
        let us: Vec<[f64; 3]> = self
            .factors
            .iter()
            .map(|(a, p)| {
                let [w, dw, ddw] = p.jet(x[*a]);
                [w * w, 2.0 * w * dw, 2.0 * (dw * dw + w * ddw)]
            })
            .collect();
        let prod_except = |skip: &[usize]| -> f64 {
            (0..m).filter(|f| !skip.contains(f)).map(|f| us[f][0]).product::<f64>()
        };
        let value = self.constant * prod_except(&[]);
        let mut grad = vec![0.0; n];
        let mut hess = vec![0.0; n * n];
        for f in 0..m {
            let a = self.factors[f].0;
            grad[a] += self.constant * us[f][1] * prod_except(&[f]);
            hess[a * n + a] += self.constant * us[f][2] * prod_except(&[f]);
            for g in 0..m {
                if g != f {
                    let b = self.factors[g].0;
                    hess[a * n + b] += self.constant * us[f][1] * us[g][1] * prod_except(&[f, g]);
                }
            }
        }
        (value, grad, hess)
    }
}

/// A diagonal chart: entries, coordinate box and labels.
#[derive(Debug, Clone)]
pub struct ChartBlock {
    pub entries: Vec<DiagEntry>,
    pub domain: Vec<(f64, f64)>,
    pub labels: Vec<String>,
}

const ANGLE_MARGIN: f64 = 0.5;

impl ChartBlock {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    /// Cartesian coordinates on `[-half, half]^m`.
    pub fn flat(m: usize, half: f64) -> Self {
        ChartBlock {
            entries: (0..m).map(|_| DiagEntry::constant(1.0)).collect(),
            domain: vec![(-half, half); m],
            labels: (0..m).map(|i| format!("x{i}")).collect(),
        }
    }

    /// Unit round `S^m` in nested polar angles; the last angle is the azimuth.
    pub fn round_sphere(m: usize) -> Self {
        let sin = shared(Sine { amp: 1.0, freq: 1.0 });
        let entries = (0..m)
            .map(|k| DiagEntry { constant: 1.0, factors: (0..k).map(|j| (j, sin.clone())).collect() })
            .collect();
        let domain = (0..m)
            .map(|k| if k + 1 == m { (-PI + ANGLE_MARGIN, PI - ANGLE_MARGIN) } else { (ANGLE_MARGIN, PI - ANGLE_MARGIN) })
            .collect();
        ChartBlock { entries, domain, labels: (0..m).map(|k| format!("theta{}", k + 1)).collect() }
    }

    /// `dt^2 + warp(t)^2 * fiber` with `t` the first coordinate.
    pub fn warped(warp: SharedProfile, t_domain: (f64, f64), fiber: &ChartBlock, t_label: &str) -> Self {
        let mut entries = vec![DiagEntry::constant(1.0)];
        for e in &fiber.entries {
            let mut e = e.shifted(1);
            e.factors.push((0, warp.clone()));
            entries.push(e);
        }
        let mut domain = vec![t_domain];
        domain.extend(fiber.domain.iter().copied());
        let mut labels = vec![t_label.to_string()];
        labels.extend(fiber.labels.iter().cloned());
        ChartBlock { entries, domain, labels }
    }

    /// Geodesic polar chart of the simply connected space form of dimension
    /// `d` and sectional curvature `k`; for `d = 1` just the line.
    pub fn space_form(d: usize, k: f64, r_domain: (f64, f64)) -> Self {
        if d == 1 {
            return ChartBlock { entries: vec![DiagEntry::constant(1.0)], domain: vec![r_domain], labels: vec!["r".into()] };
        }
        ChartBlock::warped(space_form_warp(k), r_domain, &ChartBlock::round_sphere(d - 1), "r")
    }

    /// Multiplies the metric by `c > 0`.
    pub fn scaled(mut self, c: f64) -> Self {
        self.entries.iter_mut().for_each(|e| e.constant *= c);
        self
    }

    pub fn product(blocks: &[ChartBlock]) -> Self {
        let mut entries = Vec::new();
        let mut domain = Vec::new();
        let mut labels = Vec::new();
        for (bi, b) in blocks.iter().enumerate() {
            let off = entries.len();
            entries.extend(b.entries.iter().map(|e| e.shifted(off)));
            domain.extend(b.domain.iter().copied());
            labels.extend(b.labels.iter().map(|l| format!("{l}_{}", bi + 1)));
        }
        ChartBlock { entries, domain, labels }
    }
}

/// `sin(sqrt(k) r)/sqrt(k)`, `r` or `sinh(sqrt(-k) r)/sqrt(-k)`.
pub fn space_form_warp(k: f64) -> SharedProfile {
    if k > 0.0 {
        let w = k.sqrt();
        shared(Sine { amp: 1.0 / w, freq: w })
    } else if k < 0.0 {
        let w = (-k).sqrt();
        shared(HypSine { amp: 1.0 / w, freq: w })
    } else {
        shared(Linear { slope: 1.0, offset: 0.0 })
    }
}

#[derive(Debug, Clone)]
pub struct DiagonalProductMetric {
    entries: Vec<DiagEntry>,
}

impl DiagonalProductMetric {
    pub fn new(block: &ChartBlock) -> Self {
        DiagonalProductMetric { entries: block.entries.clone() }
    }
}

impl MetricField for DiagonalProductMetric {
    fn dim(&self) -> usize {
        self.entries.len()
    }

    fn components(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut g = vec![0.0; n * n];
        for (i, e) in self.entries.iter().enumerate() {
            g[i * n + i] = e.constant * e.factors.iter().map(|(a, p)| p.value(x[*a]).powi(2)).product::<f64>();
        }
        g
    }

    fn jet(&self, x: &[f64]) -> Option<MetricJet> {
        let n = self.dim();
        let mut g = vec![0.0; n * n];
        let mut dg = vec![0.0; n * n * n];
        let mut ddg = vec![0.0; n * n * n * n];
        for (i, e) in self.entries.iter().enumerate() {
            let (v, grad, hess) = e.jet(x, n);
            g[i * n + i] = v;
            for a in 0..n {
                dg[(a * n + i) * n + i] = grad[a];
                for b in 0..n {
                    ddg[((a * n + b) * n + i) * n + i] = hess[a * n + b];
                }
            }
        }
        Some(MetricJet { n, g, dg, ddg })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tag {
    Vstatic,
    StaticVacuum,
    Einstein,
    ParallelRicci,
    WarpedProduct,
    /// Constant sectional curvature.
    SpaceForm,
}

/// Einstein fiber `(Σ^{n-1}, g0)` with `Ric = λ g0`.
#[derive(Debug, Clone)]
pub struct WarpedFiberSpec {
    pub fiber_name: String,
    pub fiber_dim: usize,
    pub block: ChartBlock,
    pub einstein_constant: f64,
    /// Whether the fiber has constant sectional curvature.
    pub constant_curvature: bool,
}

impl WarpedFiberSpec {
    /// Unit round sphere `S^d`, `λ = d - 1`.
    pub fn round_sphere(d: usize) -> Self {
        WarpedFiberSpec {
            fiber_name: format!("S{d}"),
            fiber_dim: d,
            block: ChartBlock::round_sphere(d),
            einstein_constant: d as f64 - 1.0,
            constant_curvature: true,
        }
    }

    /// Hyperbolic space `H^d` of curvature -1, `λ = -(d - 1)`.
    pub fn hyperbolic(d: usize) -> Self {
        WarpedFiberSpec {
            fiber_name: format!("H{d}"),
            fiber_dim: d,
            block: ChartBlock::space_form(d, -1.0, (0.5, 1.8)),
            einstein_constant: -(d as f64 - 1.0),
            constant_curvature: true,
        }
    }

    /// `H^2(k) x H^2(k)`: each factor has Gauss curvature `k`, so the product
    /// is Einstein with `λ = k` without constant curvature.
    pub fn hyperbolic_plane_pair(k: f64) -> Self {
        let h = ChartBlock::space_form(2, k, (0.5, 1.4));
        WarpedFiberSpec {
            fiber_name: format!("H2({k})xH2({k})"),
            fiber_dim: 4,
            block: ChartBlock::product(&[h.clone(), h]),
            einstein_constant: k,
            constant_curvature: false,
        }
    }

    pub fn by_name(name: &str, dim: usize) -> Result<Self> {
        match name {
            "hyperbolic" | "H" => Ok(Self::hyperbolic(dim)),
            "sphere" | "round" | "S" => Ok(Self::round_sphere(dim)),
            "h2xh2" => {
                if dim != 4 {
                    return Err(GeomError::InvalidParameter(format!("fiber h2xh2 has dimension 4, need {dim}")));
                }
                Ok(Self::hyperbolic_plane_pair(-3.0))
            }
            other => Err(GeomError::InvalidParameter(format!("unknown fiber '{other}'"))),
        }
    }

    /// The fiber on its own, as a model with constant potential.
    pub fn as_model(&self) -> MetricModel {
        MetricModel::from_block(
            &format!("fiber-{}", self.fiber_name),
            &self.block,
            0.0,
            constant_potential(self.fiber_dim),
            None,
            [Tag::Einstein].into(),
            BTreeMap::new(),
        )
    }
}

/// A chart description of `(M^n, g, f)` with constant `κ`.
#[derive(Debug, Clone)]
pub struct MetricModel {
    pub name: String,
    pub n: usize,
    pub domain: Vec<(f64, f64)>,
    pub kappa: f64,
    pub metric: Arc<dyn MetricField>,
    pub potential: Arc<dyn ScalarField>,
    pub expected_scalar_curvature: Option<f64>,
    pub tags: BTreeSet<Tag>,
    pub params: BTreeMap<String, Value>,
    /// Warping function of `dr^2 + φ(r)^2 g_Σ` when the first coordinate is
    /// the warping coordinate.
    pub warp: Option<SharedProfile>,
    /// Size of the potential and curvature components over the chart; scales
    /// tolerances.
    pub scale: f64,
}

fn constant_potential(n: usize) -> Arc<dyn ScalarField> {
    Arc::new(AxisPotential { n, axis: 0, offset: 0.0, scale: 0.0, profile: shared(Constant(0.0)) })
}

impl MetricModel {
    fn from_block(
        name: &str,
        block: &ChartBlock,
        kappa: f64,
        potential: Arc<dyn ScalarField>,
        expected_r: Option<f64>,
        tags: BTreeSet<Tag>,
        params: BTreeMap<String, Value>,
    ) -> Self {
        MetricModel {
            name: name.to_string(),
            n: block.dim(),
            domain: block.domain.clone(),
            kappa,
            metric: Arc::new(DiagonalProductMetric::new(block)),
            potential,
            expected_scalar_curvature: expected_r,
            tags,
            params,
            warp: None,
            scale: 1.0,
        }
    }

    pub fn has(&self, tag: Tag) -> bool {
        self.tags.contains(&tag)
    }

    pub fn metric_at(&self, x: &[f64]) -> Result<MetricAtPoint> {
        MetricAtPoint::new(self.n, self.metric.components(x))
    }

    pub fn potential_at(&self, x: &[f64]) -> f64 {
        self.potential.value(x)
    }

    /// Whether `x` sits at least `margin` inside the chart box.
    pub fn is_interior(&self, x: &[f64], margin: f64) -> bool {
        x.len() == self.n && x.iter().zip(&self.domain).all(|(v, (lo, hi))| *v >= lo + margin && *v <= hi - margin)
    }

    /// Same metric, different potential (used for non-V-static witnesses).
    pub fn with_potential(&self, name: &str, potential: Arc<dyn ScalarField>) -> Self {
        let mut m = self.clone();
        m.name = name.to_string();
        m.potential = potential;
        m
    }
}

fn require_n(n: usize) -> Result<()> {
    if n < 3 {
        return Err(GeomError::InvalidParameter(format!("n must be ≥ 3 (got {n})")));
    }
    if n > 8 {
        return Err(GeomError::InvalidParameter(format!("n must be ≤ 8 (got {n})")));
    }
    Ok(())
}

fn require_kappa(kappa: f64) -> Result<()> {
    if kappa == 0.0 || !kappa.is_finite() {
        return Err(GeomError::InvalidParameter("kappa must be a nonzero finite number".into()));
    }
    Ok(())
}

/// `(R^n, δ)` with `f = (A - κ|x|^2/2)/(n-1)`.
pub fn euclidean_model(n: usize, a: f64, kappa: f64) -> Result<MetricModel> {
    require_n(n)?;
    require_kappa(kappa)?;
    let nm1 = n as f64 - 1.0;
    let pot = Arc::new(RadialQuadratic { n, offset: a / nm1, coef: -kappa / (2.0 * nm1) });
    let params = BTreeMap::from([("n".into(), json!(n)), ("A".into(), json!(a)), ("kappa".into(), json!(kappa))]);
    let mut m =
        MetricModel::from_block("euclidean", &ChartBlock::flat(n, 1.5), kappa, pot, Some(0.0), [Tag::Vstatic, Tag::Einstein, Tag::SpaceForm].into(), params);
    m.scale = 1.0 + a.abs() + kappa.abs();
    Ok(m)
}

/// Unit `S^n` in geodesic polar coordinates with `f = (A cos r - κ)/(n-1)`.
pub fn sphere_model(n: usize, a: f64, kappa: f64) -> Result<MetricModel> {
    require_n(n)?;
    require_kappa(kappa)?;
    if a == 0.0 {
        return Err(GeomError::InvalidParameter("A must be nonzero (f must be non-constant)".into()));
    }
    let nm1 = n as f64 - 1.0;
    let block = ChartBlock::space_form(n, 1.0, (0.5, PI - 0.5));
    let pot = Arc::new(AxisPotential { n, axis: 0, offset: -kappa / nm1, scale: a / nm1, profile: shared(Cosine { amp: 1.0, freq: 1.0 }) });
    let params = BTreeMap::from([("n".into(), json!(n)), ("A".into(), json!(a)), ("kappa".into(), json!(kappa))]);
    let mut m = MetricModel::from_block(
        "sphere",
        &block,
        kappa,
        pot,
        Some(n as f64 * nm1),
        [Tag::Vstatic, Tag::Einstein, Tag::WarpedProduct, Tag::SpaceForm].into(),
        params,
    );
    m.warp = Some(space_form_warp(1.0));
    m.scale = 1.0 + a.abs() + kappa.abs();
    Ok(m)
}

/// `H^n` in geodesic polar coordinates with `f = (κ - A cosh r)/(n-1)`.
pub fn hyperbolic_model(n: usize, a: f64, kappa: f64) -> Result<MetricModel> {
    require_n(n)?;
    require_kappa(kappa)?;
    if a == 0.0 {
        return Err(GeomError::InvalidParameter("A must be nonzero (f must be non-constant)".into()));
    }
    let nm1 = n as f64 - 1.0;
    let block = ChartBlock::space_form(n, -1.0, (0.5, 3.0));
    let pot = Arc::new(AxisPotential { n, axis: 0, offset: kappa / nm1, scale: -a / nm1, profile: shared(HypCosine { amp: 1.0, freq: 1.0 }) });
    let params = BTreeMap::from([("n".into(), json!(n)), ("A".into(), json!(a)), ("kappa".into(), json!(kappa))]);
    let mut m = MetricModel::from_block(
        "hyperbolic",
        &block,
        kappa,
        pot,
        Some(-(n as f64) * nm1),
        [Tag::Vstatic, Tag::Einstein, Tag::WarpedProduct, Tag::SpaceForm].into(),
        params,
    );
    m.warp = Some(space_form_warp(-1.0));
    m.scale = (1.0 + a.abs() + kappa.abs()) * 3f64.cosh().powi(2);
    Ok(m)
}

/// `dt^2 + cosh^2 t g0` over an Einstein fiber with `Ric_{g0} = -(n-2) g0`,
/// `f = κ (A sinh t + 1)/(n-1)`.
pub fn cosh_warped_model(n: usize, a: f64, kappa: f64, fiber: &WarpedFiberSpec) -> Result<MetricModel> {
    require_n(n)?;
    require_kappa(kappa)?;
    if !(a > 0.0) {
        return Err(GeomError::InvalidParameter("A must be > 0".into()));
    }
    if fiber.fiber_dim != n - 1 {
        return Err(GeomError::InvalidParameter(format!("fiber dimension {} != n - 1 = {}", fiber.fiber_dim, n - 1)));
    }
    let want = -(n as f64 - 2.0);
    if (fiber.einstein_constant - want).abs() > 1e-12 {
        return Err(GeomError::InvalidParameter(format!(
            "fiber Einstein constant {} must equal -(n-2) = {want}",
            fiber.einstein_constant
        )));
    }
    let nm1 = n as f64 - 1.0;
    let cosh = shared(HypCosine { amp: 1.0, freq: 1.0 });
    let block = ChartBlock::warped(cosh.clone(), (-2.0, 2.0), &fiber.block, "t");
    let pot = Arc::new(AxisPotential { n, axis: 0, offset: kappa / nm1, scale: kappa * a / nm1, profile: shared(HypSine { amp: 1.0, freq: 1.0 }) });
    let mut tags: BTreeSet<Tag> = [Tag::Vstatic, Tag::Einstein, Tag::WarpedProduct].into();
    if fiber.constant_curvature {
        tags.insert(Tag::SpaceForm);
    }
    let params = BTreeMap::from([
        ("n".into(), json!(n)),
        ("A".into(), json!(a)),
        ("kappa".into(), json!(kappa)),
        ("fiber".into(), json!(fiber.fiber_name)),
    ]);
    let mut m = MetricModel::from_block("cosh-warped", &block, kappa, pot, Some(-(n as f64) * nm1), tags, params);
    m.warp = Some(cosh);
    m.scale = (1.0 + a.abs() + kappa.abs()) * 2f64.cosh().powi(2);
    Ok(m)
}

/// `H^{p+1} x ((q-1)/(p+1)) H^q` with `f = cosh r1`, static vacuum.
pub fn hyperbolic_product_static(p: usize, q: usize) -> Result<MetricModel> {
    if q <= 1 {
        return Err(GeomError::InvalidParameter(format!("q must be > 1 (got {q})")));
    }
    require_n(p + 1 + q)?;
    let c = (q as f64 - 1.0) / (p as f64 + 1.0);
    let block = ChartBlock::product(&[
        ChartBlock::space_form(p + 1, -1.0, (0.5, 2.5)),
        ChartBlock::space_form(q, -1.0, (0.5, 1.5)).scaled(c),
    ]);
    let n = block.dim();
    let pot = Arc::new(AxisPotential { n, axis: 0, offset: 0.0, scale: 1.0, profile: shared(HypCosine { amp: 1.0, freq: 1.0 }) });
    let r = -((p + 1) as f64) * (p + q) as f64;
    let params = BTreeMap::from([("p".into(), json!(p)), ("q".into(), json!(q)), ("n".into(), json!(n))]);
    let mut m = MetricModel::from_block(
        "hyperbolic-product",
        &block,
        0.0,
        pot,
        Some(r),
        [Tag::StaticVacuum, Tag::ParallelRicci].into(),
        params,
    );
    m.scale = 2.5f64.cosh().powi(2);
    Ok(m)
}

/// `S^{p+1} x ((q-1)/(p+1)) S^q` with `f = cos r1`, static vacuum.
pub fn sphere_product_static(p: usize, q: usize) -> Result<MetricModel> {
    if q <= 1 {
        return Err(GeomError::InvalidParameter(format!("q must be > 1 (got {q})")));
    }
    require_n(p + 1 + q)?;
    let c = (q as f64 - 1.0) / (p as f64 + 1.0);
    let block = ChartBlock::product(&[
        ChartBlock::space_form(p + 1, 1.0, (0.5, PI - 0.5)),
        ChartBlock::space_form(q, 1.0, (0.5, PI - 0.5)).scaled(c),
    ]);
    let n = block.dim();
    let pot = Arc::new(AxisPotential { n, axis: 0, offset: 0.0, scale: 1.0, profile: shared(Cosine { amp: 1.0, freq: 1.0 }) });
    let r = ((p + 1) as f64) * (p + q) as f64;
    let params = BTreeMap::from([("p".into(), json!(p)), ("q".into(), json!(q)), ("n".into(), json!(n))]);
    Ok(MetricModel::from_block(
        "sphere-product",
        &block,
        0.0,
        pot,
        Some(r),
        [Tag::StaticVacuum, Tag::ParallelRicci].into(),
        params,
    ))
}

/// Unit `S^2 x S^2`, Einstein with `Ric = g`; the potential is zero.
pub fn sphere_pair_model() -> MetricModel {
    let s2 = ChartBlock::space_form(2, 1.0, (0.5, PI - 0.5));
    let block = ChartBlock::product(&[s2.clone(), s2]);
    MetricModel::from_block(
        "s2xs2",
        &block,
        0.0,
        constant_potential(4),
        Some(4.0),
        [Tag::Einstein, Tag::ParallelRicci].into(),
        BTreeMap::new(),
    )
}

/// `dr^2 + φ(r)^2 g_Σ` with an arbitrary positive warping profile.
pub fn generic_warped_model(
    n: usize,
    phi: SharedProfile,
    r_domain: (f64, f64),
    fiber: &WarpedFiberSpec,
    potential: Option<SharedProfile>,
) -> Result<MetricModel> {
    require_n(n)?;
    if fiber.fiber_dim != n - 1 {
        return Err(GeomError::InvalidParameter(format!("fiber dimension {} != n - 1 = {}", fiber.fiber_dim, n - 1)));
    }
    let (lo, hi) = r_domain;
    if !(lo < hi) {
        return Err(GeomError::InvalidParameter("empty r interval".into()));
    }
    const PROBES: usize = 2000;
    for k in 0..=PROBES {
        let r = lo + (hi - lo) * k as f64 / PROBES as f64;
        let v = phi.value(r);
        if !(v > 0.0) {
            return Err(GeomError::NonPositiveWarp { r });
        }
    }
    let block = ChartBlock::warped(phi.clone(), r_domain, &fiber.block, "r");
    let profile = potential.unwrap_or_else(|| shared(Constant(0.0)));
    let pot = Arc::new(AxisPotential { n, axis: 0, offset: 0.0, scale: 1.0, profile });
    let params = BTreeMap::from([
        ("n".into(), json!(n)),
        ("fiber".into(), json!(fiber.fiber_name)),
        ("r_min".into(), json!(lo)),
        ("r_max".into(), json!(hi)),
    ]);
    let mut m = MetricModel::from_block("generic-warped", &block, 0.0, pot, None, [Tag::WarpedProduct].into(), params);
    m.warp = Some(phi);
    Ok(m)
}

/// `dt^2 + a(t)^2 g_1 + b(t)^2 g_2` over `H^2(-3) x H^2(-3)` with two
/// different warps; not a warped product over a single Einstein fiber, so
/// its Cotton tensor does not vanish.
pub fn doubly_warped_model() -> MetricModel {
    let h = ChartBlock::space_form(2, -3.0, (0.5, 1.4));
    let a = shared(HypCosine { amp: 1.0, freq: 1.0 });
    let b = shared(HypCosine { amp: 1.2, freq: 0.8 });
    let mut entries = vec![DiagEntry::constant(1.0)];
    for (off, w) in [(1usize, a), (3usize, b)] {
        for e in &h.entries {
            let mut e = e.shifted(off);
            e.factors.push((0, w.clone()));
            entries.push(e);
        }
    }
    let mut domain = vec![(-1.5, 1.5)];
    domain.extend(h.domain.iter().copied());
    domain.extend(h.domain.iter().copied());
    let block = ChartBlock { entries, domain, labels: (0..5).map(|i| format!("x{i}")).collect() };
    let pot = Arc::new(AxisPotential { n: 5, axis: 0, offset: 0.0, scale: 1.0, profile: shared(HypSine { amp: 1.0, freq: 1.0 }) });
    let mut m = MetricModel::from_block("doubly-warped", &block, 0.0, pot, None, BTreeSet::new(), BTreeMap::new());
    m.scale = 4.0;
    m
}

/// Sphere model with `f` multiplied by `1.1`: fails the V-static equation.
pub fn perturbed_sphere_model(n: usize, a: f64, kappa: f64) -> Result<MetricModel> {
    let base = sphere_model(n, a, kappa)?;
    let pot = Arc::new(ScaledPotential { factor: 1.1, base: base.potential.clone() });
    let mut m = base.with_potential("sphere-perturbed", pot);
    m.params.insert("perturbation".into(), json!("f *= 1.1"));
    Ok(m)
}

/// `hyperbolic_product_static(p, q)` with `f = cosh r1 + 0.1 cosh r2`, where
/// `r2` is the radial coordinate of the second factor. The extra term breaks
/// the static equation, the gradient-of-Ricci identity and the traceless-Ricci
/// divergence identity; a pure rescaling of `f` would not, since all three
/// are homogeneous in `f` when `κ = 0`.
pub fn perturbed_product_model(p: usize, q: usize) -> Result<MetricModel> {
    let base = hyperbolic_product_static(p, q)?;
    let n = base.n;
    let extra: Arc<dyn ScalarField> =
        Arc::new(AxisPotential { n, axis: p + 1, offset: 0.0, scale: 0.1, profile: shared(HypCosine { amp: 1.0, freq: 1.0 }) });
    let pot = Arc::new(SumPotential(vec![base.potential.clone(), extra]));
    let mut m = base.with_potential("product-perturbed", pot);
    m.params.insert("perturbation".into(), json!("f += 0.1 cosh r2"));
    Ok(m)
}

/// Sphere metric paired with `f = cos^2 r`.
pub fn sphere_cos_squared_pair(n: usize) -> Result<MetricModel> {
    let base = sphere_model(n, 1.0, 1.0)?;
    let prof = shared(crate::profile::Squared(shared(Cosine { amp: 1.0, freq: 1.0 })));
    let pot = Arc::new(AxisPotential { n, axis: 0, offset: 0.0, scale: 1.0, profile: prof });
    Ok(base.with_potential("sphere-cos2", pot))
}

/// Every catalog model used by the identity batteries.
pub fn catalog() -> Vec<MetricModel> {
    let mut out = vec![
        euclidean_model(3, 5.0, 2.0).unwrap(),
        euclidean_model(4, 1.0, -1.0).unwrap(),
        sphere_model(3, 1.0, 1.0).unwrap(),
        sphere_model(4, 1.0, 1.0).unwrap(),
        hyperbolic_model(3, 1.0, 1.0).unwrap(),
        hyperbolic_model(4, 1.0, 1.0).unwrap(),
        cosh_warped_model(4, 1.0, 1.0, &WarpedFiberSpec::hyperbolic(3)).unwrap(),
        cosh_warped_model(5, 1.0, 1.0, &WarpedFiberSpec::hyperbolic_plane_pair(-3.0)).unwrap(),
        hyperbolic_product_static(1, 3).unwrap(),
        sphere_product_static(1, 3).unwrap(),
    ];
    out.iter_mut().for_each(|m| {
        let mut suffix = format!("-n{}", m.n);
        if m.name == "cosh-warped" {
            suffix.push_str(&format!("-{}", m.params["fiber"].as_str().unwrap_or("")));
        }
        m.name.push_str(&suffix);
    });
    out
}

/// Model lookup by CLI name and parameter map.
pub fn build_model(name: &str, params: &ModelParams) -> Result<MetricModel> {
    let n = params.n.unwrap_or(4);
    let a = params.a.unwrap_or(1.0);
    let kappa = params.kappa.unwrap_or(1.0);
    let p = params.p.unwrap_or(1);
    let q = params.q.unwrap_or(3);
    match name {
        "euclidean" => euclidean_model(n, a, kappa),
        "sphere" => sphere_model(n, a, kappa),
        "hyperbolic" => hyperbolic_model(n, a, kappa),
        "cosh-warped" => {
            require_n(n)?;
            let fiber_name = params.fiber.as_deref().unwrap_or("hyperbolic");
            let fiber = WarpedFiberSpec::by_name(fiber_name, n - 1)?;
            let fiber = if fiber_name == "h2xh2" { WarpedFiberSpec::hyperbolic_plane_pair(-(n as f64 - 2.0)) } else { fiber };
            cosh_warped_model(n, a, kappa, &fiber)
        }
        "hyperbolic-product" => hyperbolic_product_static(p, q),
        "sphere-product" => sphere_product_static(p, q),
        "s2xs2" => Ok(sphere_pair_model()),
        "doubly-warped" => Ok(doubly_warped_model()),
        "sphere-perturbed" => perturbed_sphere_model(n, a, kappa),
        "product-perturbed" => perturbed_product_model(p, q),
        other => Err(GeomError::UnknownModel(other.to_string())),
    }
}

pub const MODEL_NAMES: &[&str] = &[
    "euclidean",
    "sphere",
    "hyperbolic",
    "cosh-warped",
    "hyperbolic-product",
    "sphere-product",
    "s2xs2",
    "doubly-warped",
    "sphere-perturbed",
    "product-perturbed",
];

#[derive(Debug, Clone, Default, Serialize)]
pub struct ModelParams {
    pub n: Option<usize>,
    pub a: Option<f64>,
    pub kappa: Option<f64>,
    pub p: Option<usize>,
    pub q: Option<usize>,
    pub fiber: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_potential_values() {
        let m = euclidean_model(3, 5.0, 2.0).unwrap();
        let (f, grad, hess) = m.potential.jet(&[1.0, 0.0, 0.0]);
        assert_eq!(f, 2.0);
        assert_eq!(grad, vec![-1.0, 0.0, 0.0]);
        assert_eq!(hess[0], -1.0);
        assert_eq!(hess[4], -1.0);
        let (f0, g0, _) = m.potential.jet(&[0.0; 3]);
        assert_eq!(f0, 2.5);
        assert!(g0.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn constructor_preconditions() {
        assert!(euclidean_model(2, 1.0, 1.0).is_err());
        assert!(euclidean_model(3, 1.0, 0.0).is_err());
        let e = sphere_model(2, 1.0, 1.0).unwrap_err();
        assert!(e.to_string().contains("n must be ≥ 3"));
        assert!(hyperbolic_product_static(1, 1).is_err());
        assert!(sphere_product_static(0, 1).is_err());
        assert!(cosh_warped_model(4, 1.0, 1.0, &WarpedFiberSpec::round_sphere(3)).is_err());
        assert!(cosh_warped_model(4, -1.0, 1.0, &WarpedFiberSpec::hyperbolic(3)).is_err());
        assert!(matches!(build_model("torus", &ModelParams::default()), Err(GeomError::UnknownModel(_))));
    }

    #[test]
    fn generic_warped_rejects_nonpositive_warp() {
        let fiber = WarpedFiberSpec::round_sphere(3);
        let err = generic_warped_model(4, shared(Sine { amp: 1.0, freq: 1.0 }), (0.5, 4.0), &fiber, None).unwrap_err();
        assert!(matches!(err, GeomError::NonPositiveWarp { .. }));
    }

    #[test]
    fn diagonal_jet_matches_components() {
        let m = hyperbolic_product_static(1, 3).unwrap();
        let x = [0.9, 0.4, 0.7, 1.1, -0.5];
        let jet = m.metric.jet(&x).unwrap();
        assert_eq!(jet.g, m.metric.components(&x));
        let n = m.n;
        for a in 0..n {
            let d = crate::fd::partial(&|y: &[f64]| m.metric.components(y), &x, a, 1e-3, 2);
            for k in 0..n * n {
                assert!((d[k] - jet.dg[a * n * n + k]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn catalog_names_are_unique() {
        let names: BTreeSet<String> = catalog().into_iter().map(|m| m.name).collect();
        assert_eq!(names.len(), catalog().len());
    }
}
