//! Dense tensor components at a single point of a coordinate chart.
//!
//! Components are stored row-major: the multi-index `(i0, .., i_{r-1})` maps to
//! `sum_s i_s * n^(r-1-s)`. Contractions written with repeated lower indices in
//! the formulas of this crate always go through the inverse metric.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{GeomError, Result};

/// Coordinates of a point in a chart.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(GeomError::InvalidParameter(format!(
                "point must have at least 2 coordinates, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(GeomError::InvalidParameter("non-finite coordinate".into()));
        }
        Ok(Point(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Variance {
    Co,
    Contra,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
}

/// Symmetry class declared for the leading slots of a tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Symmetry {
    None,
    /// Symmetric in the first two slots.
    SymmetricPair,
    /// Skew in the first two slots.
    SkewPair,
    /// Algebraic curvature tensor: skew in (0,1) and (2,3), pair-symmetric,
    /// first Bianchi identity.
    RiemannType,
}

/// Metric components at a point together with their inverse.
#[derive(Debug, Clone)]
pub struct MetricAtPoint {
    n: usize,
    g: Vec<f64>,
    g_inv: Vec<f64>,
    det: f64,
}

impl MetricAtPoint {
    /// Builds from a row-major `n x n` array. Fails unless the matrix is
    /// symmetric positive definite.
    pub fn new(n: usize, g: Vec<f64>) -> Result<Self> {
        if g.len() != n * n {
            return Err(GeomError::DimensionMismatch { expected: n * n, got: g.len() });
        }
        let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        for i in 0..n {
            for j in 0..i {
                if (g[i * n + j] - g[j * n + i]).abs() > 1e-12 * scale {
                    return Err(GeomError::SingularMetric);
                }
            }
        }
        let m = DMatrix::from_row_slice(n, n, &g);
        let chol = m.cholesky().ok_or(GeomError::SingularMetric)?;
        let det = chol.determinant();
        let inv = chol.inverse();
        let mut g_inv = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                g_inv[i * n + j] = 0.5 * (inv[(i, j)] + inv[(j, i)]);
            }
        }
        Ok(MetricAtPoint { n, g, g_inv, det })
    }

    pub fn identity(n: usize) -> Self {
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            g[i * n + i] = 1.0;
        }
        MetricAtPoint { n, g_inv: g.clone(), g, det: 1.0 }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn g(&self, i: usize, j: usize) -> f64 {
        self.g[i * self.n + j]
    }

    #[inline]
    pub fn inv(&self, i: usize, j: usize) -> f64 {
        self.g_inv[i * self.n + j]
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.g
    }

    pub fn inv_slice(&self) -> &[f64] {
        &self.g_inv
    }

    /// The metric itself as a covariant symmetric 2-tensor.
    pub fn as_tensor(&self) -> TensorComponents {
        TensorComponents::covariant(self.n, 2, self.g.clone(), Symmetry::SymmetricPair)
    }

    /// Raises a covector with the inverse metric.
    pub fn raise_vec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n).map(|i| (0..n).map(|j| self.g_inv[i * n + j] * v[j]).sum()).collect()
    }

    pub fn lower_vec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n).map(|i| (0..n).map(|j| self.g[i * n + j] * v[j]).sum()).collect()
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        let n = self.n;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += self.g[i * n + j] * u[i] * v[j];
            }
        }
        s
    }
}

/// Components of a tensor at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorComponents {
    dim: usize,
    variance: Vec<Variance>,
    data: Vec<f64>,
    symmetry: Symmetry,
}

pub(crate) fn pow(n: usize, r: usize) -> usize {
    n.pow(r as u32)
}

impl TensorComponents {
    /// Builds a tensor and projects the data onto the declared symmetry class.
    pub fn new(dim: usize, variance: Vec<Variance>, data: Vec<f64>, symmetry: Symmetry) -> Result<Self> {
        let rank = variance.len();
        if data.len() != pow(dim, rank) {
            return Err(GeomError::DimensionMismatch { expected: pow(dim, rank), got: data.len() });
        }
        let needed = match symmetry {
            Symmetry::None => 0,
            Symmetry::SymmetricPair | Symmetry::SkewPair => 2,
            Symmetry::RiemannType => 4,
        };
        if rank < needed || (symmetry == Symmetry::RiemannType && rank != 4) {
            return Err(GeomError::InvalidParameter(format!(
                "symmetry {symmetry:?} needs rank {needed}, got {rank}"
            )));
        }
        let mut t = TensorComponents { dim, variance, data, symmetry };
        t.project();
        Ok(t)
    }

    /// All-covariant constructor for internal use; panics on size mismatch.
    pub(crate) fn covariant(dim: usize, rank: usize, data: Vec<f64>, symmetry: Symmetry) -> Self {
        assert_eq!(data.len(), pow(dim, rank));
        let mut t = TensorComponents { dim, variance: vec![Variance::Co; rank], data, symmetry };
        t.project();
        t
    }

    /// All-covariant tensor without symmetry projection.
    pub(crate) fn raw(dim: usize, rank: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), pow(dim, rank));
        TensorComponents { dim, variance: vec![Variance::Co; rank], data, symmetry: Symmetry::None }
    }

    pub fn zeros(dim: usize, rank: usize) -> Self {
        Self::raw(dim, rank, vec![0.0; pow(dim, rank)])
    }

    pub fn scalar(dim: usize, v: f64) -> Self {
        Self::raw(dim, 0, vec![v])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn is_covariant(&self) -> bool {
        self.variance.iter().all(|v| *v == Variance::Co)
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut t = self.clone();
        t.data.iter_mut().for_each(|v| *v *= s);
        t
    }

    /// Componentwise `self - other`; both must share shape and variance.
    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.data.len(), other.data.len());
        assert_eq!(self.variance, other.variance);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        TensorComponents { dim: self.dim, variance: self.variance.clone(), data, symmetry: Symmetry::None }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.data.len(), other.data.len());
        assert_eq!(self.variance, other.variance);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        TensorComponents { dim: self.dim, variance: self.variance.clone(), data, symmetry: Symmetry::None }
    }

    /// Largest violation of the declared symmetry class.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.dim;
        let r = self.rank();
        let mut worst = 0.0f64;
        if r < 2 {
            return 0.0;
        }
        let stride0 = pow(n, r - 1);
        let stride1 = pow(n, r - 2);
        let swap01 = |idx: usize| {
            let i = idx / stride0 % n;
            let j = idx / stride1 % n;
            idx - i * stride0 - j * stride1 + j * stride0 + i * stride1
        };
        match self.symmetry {
            Symmetry::None => {}
            Symmetry::SymmetricPair => {
                for (k, v) in self.data.iter().enumerate() {
                    worst = worst.max((v - self.data[swap01(k)]).abs());
                }
            }
            Symmetry::SkewPair => {
                for (k, v) in self.data.iter().enumerate() {
                    worst = worst.max((v + self.data[swap01(k)]).abs());
                }
            }
            Symmetry::RiemannType => {
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            for l in 0..n {
                                let z = self.get(&[i, j, k, l]);
                                worst = worst.max((z + self.get(&[j, i, k, l])).abs());
                                worst = worst.max((z + self.get(&[i, j, l, k])).abs());
                                worst = worst.max((z - self.get(&[k, l, i, j])).abs());
                                let b = z + self.get(&[j, k, i, l]) + self.get(&[k, i, j, l]);
                                worst = worst.max(b.abs());
                            }
                        }
                    }
                }
            }
        }
        worst
    }

    fn project(&mut self) {
        let n = self.dim;
        let r = self.rank();
        match self.symmetry {
            Symmetry::None => {}
            Symmetry::SymmetricPair | Symmetry::SkewPair => {
                let sign = if self.symmetry == Symmetry::SymmetricPair { 1.0 } else { -1.0 };
                let stride0 = pow(n, r - 1);
                let stride1 = pow(n, r - 2);
                let old = self.data.clone();
                for (k, v) in self.data.iter_mut().enumerate() {
                    let i = k / stride0 % n;
                    let j = k / stride1 % n;
                    let s = k - i * stride0 - j * stride1 + j * stride0 + i * stride1;
                    *v = 0.5 * (old[k] + sign * old[s]);
                }
            }
            Symmetry::RiemannType => {
                let at = |d: &[f64], i: usize, j: usize, k: usize, l: usize| d[((i * n + j) * n + k) * n + l];
                let old = self.data.clone();
                let mut pairs = vec![0.0; old.len()];
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            for l in 0..n {
                                let a = at(&old, i, j, k, l) - at(&old, j, i, k, l) - at(&old, i, j, l, k)
                                    + at(&old, j, i, l, k);
                                let b = at(&old, k, l, i, j) - at(&old, l, k, i, j) - at(&old, k, l, j, i)
                                    + at(&old, l, k, j, i);
                                pairs[((i * n + j) * n + k) * n + l] = (a + b) / 8.0;
                            }
                        }
                    }
                }
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            for l in 0..n {
                                let cyc = at(&pairs, i, j, k, l) + at(&pairs, j, k, i, l) + at(&pairs, k, i, j, l);
                                self.data[((i * n + j) * n + k) * n + l] = at(&pairs, i, j, k, l) - cyc / 3.0;
                            }
                        }
                    }
                }
            }
        }
    }

    /// Applies `m` (an `n x n` row-major matrix) to one slot:
    /// `out[.., i, ..] = sum_m m[i][k] t[.., k, ..]`.
    fn apply_to_slot(&self, slot: usize, m: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let stride = pow(n, self.rank() - 1 - slot);
        let mut out = vec![0.0; self.data.len()];
        for (idx, o) in out.iter_mut().enumerate() {
            let i = idx / stride % n;
            let base = idx - i * stride;
            let mut s = 0.0;
            for k in 0..n {
                s += m[i * n + k] * self.data[base + k * stride];
            }
            *o = s;
        }
        out
    }

    /// Same tensor with every slot covariant.
    pub fn lowered_all(&self, m: &MetricAtPoint) -> Self {
        let mut t = self.clone();
        for s in 0..t.rank() {
            if t.variance[s] == Variance::Contra {
                t.data = t.apply_to_slot(s, m.as_slice());
                t.variance[s] = Variance::Co;
            }
        }
        t
    }

    /// Same tensor with every slot contravariant.
    pub fn raised_all(&self, m: &MetricAtPoint) -> Self {
        let mut t = self.clone();
        for s in 0..t.rank() {
            if t.variance[s] == Variance::Co {
                t.data = t.apply_to_slot(s, m.inv_slice());
                t.variance[s] = Variance::Contra;
            }
        }
        t
    }
}

/// Flips the variance of one slot using the metric or its inverse.
pub fn raise_lower(t: &TensorComponents, slot: usize, m: &MetricAtPoint, dir: Direction) -> Result<TensorComponents> {
    if slot >= t.rank() {
        return Err(GeomError::SlotOutOfRange { slot, rank: t.rank() });
    }
    if m.dim() != t.dim() {
        return Err(GeomError::DimensionMismatch { expected: t.dim(), got: m.dim() });
    }
    if !m.det().is_finite() || m.det() <= 0.0 {
        return Err(GeomError::SingularMetric);
    }
    let (from, to, mat) = match dir {
        Direction::Up => (Variance::Co, Variance::Contra, m.inv_slice()),
        Direction::Down => (Variance::Contra, Variance::Co, m.as_slice()),
    };
    if t.variance[slot] != from {
        return Err(GeomError::VarianceMismatch { slot });
    }
    let mut variance = t.variance.clone();
    variance[slot] = to;
    // Index gymnastics on one slot keeps pair symmetries only if the slot is
    // outside the declared pair.
    let symmetry = match t.symmetry {
        Symmetry::None => Symmetry::None,
        Symmetry::SymmetricPair | Symmetry::SkewPair if slot >= 2 => t.symmetry,
        _ => Symmetry::None,
    };
    Ok(TensorComponents { dim: t.dim, variance, data: t.apply_to_slot(slot, mat), symmetry })
}

/// Full contraction `t_{i..} t^{i..}`.
pub fn full_norm_sq(t: &TensorComponents, m: &MetricAtPoint) -> f64 {
    let lo = t.lowered_all(m);
    let up = t.raised_all(m);
    lo.data.iter().zip(&up.data).map(|(a, b)| a * b).sum::<f64>().max(0.0)
}

/// Invariant norm `sqrt(|t|^2)`.
pub fn norm(t: &TensorComponents, m: &MetricAtPoint) -> f64 {
    full_norm_sq(t, m).sqrt()
}

/// `g^{ij} t_{ij}` of a covariant 2-tensor.
pub fn trace(t: &TensorComponents, m: &MetricAtPoint) -> f64 {
    let n = t.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += m.inv(i, j) * t.data[i * n + j];
        }
    }
    s
}

/// `t - (tr t / n) g` for a symmetric covariant 2-tensor.
pub fn traceless_part(t: &TensorComponents, m: &MetricAtPoint) -> TensorComponents {
    assert_eq!(t.rank(), 2);
    let n = t.dim();
    let tr = trace(t, m) / n as f64;
    let data = (0..n * n).map(|k| t.data[k] - tr * m.as_slice()[k]).collect();
    TensorComponents::covariant(n, 2, data, Symmetry::SymmetricPair)
}

/// Kulkarni-Nomizu product
/// `(a ⊙ b)_{ijkl} = a_ik b_jl + a_jl b_ik - a_il b_jk - a_jk b_il`.
pub fn kulkarni_nomizu(a: &TensorComponents, b: &TensorComponents) -> Result<TensorComponents> {
    if a.dim() != b.dim() {
        return Err(GeomError::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    if a.rank() != 2 || b.rank() != 2 {
        return Err(GeomError::InvalidParameter("Kulkarni-Nomizu product needs rank-2 inputs".into()));
    }
    let n = a.dim();
    let x = |t: &TensorComponents, i: usize, j: usize| t.data[i * n + j];
    let mut data = vec![0.0; pow(n, 4)];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    data[((i * n + j) * n + k) * n + l] = x(a, i, k) * x(b, j, l) + x(a, j, l) * x(b, i, k)
                        - x(a, i, l) * x(b, j, k)
                        - x(a, j, k) * x(b, i, l);
                }
            }
        }
    }
    Ok(TensorComponents::raw(n, 4, data))
}

/// Contracts covariant slot `slot` of `t` with the vector `v^i` (upper index).
pub fn contract_vector(t: &TensorComponents, slot: usize, v: &[f64]) -> TensorComponents {
    let n = t.dim();
    let r = t.rank();
    assert!(slot < r);
    let stride = pow(n, r - 1 - slot);
    let out_len = pow(n, r - 1);
    let mut out = vec![0.0; out_len];
    for (o_idx, o) in out.iter_mut().enumerate() {
        // Split the reduced index around the removed slot.
        let hi = o_idx / stride;
        let lo = o_idx % stride;
        let base = hi * stride * n + lo;
        let mut s = 0.0;
        for k in 0..n {
            s += t.data[base + k * stride] * v[k];
        }
        *o = s;
    }
    TensorComponents::raw(n, r - 1, out)
}

/// Contracts covariant slots `a < b` with the inverse metric.
pub fn metric_contract(t: &TensorComponents, a: usize, b: usize, m: &MetricAtPoint) -> TensorComponents {
    let n = t.dim();
    let r = t.rank();
    assert!(a < b && b < r);
    let sa = pow(n, r - 1 - a);
    let sb = pow(n, r - 1 - b);
    let mut out = Vec::with_capacity(pow(n, r - 2));
    let mut idx = vec![0usize; r - 2];
    for _ in 0..pow(n, r - 2) {
        // Rebuild the full base offset with zeros in slots a and b.
        let mut base = 0;
        let mut q = 0;
        for s in 0..r {
            base *= n;
            if s != a && s != b {
                base += idx[q];
                q += 1;
            }
        }
        let mut sum = 0.0;
        for i in 0..n {
            for j in 0..n {
                let gij = m.inv(i, j);
                if gij != 0.0 {
                    sum += gij * t.data[base + i * sa + j * sb];
                }
            }
        }
        out.push(sum);
        for q in (0..r - 2).rev() {
            idx[q] += 1;
            if idx[q] < n {
                break;
            }
            idx[q] = 0;
        }
    }
    TensorComponents::raw(n, r - 2, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s2_metric(theta: f64) -> MetricAtPoint {
        MetricAtPoint::new(2, vec![1.0, 0.0, 0.0, theta.sin().powi(2)]).unwrap()
    }

    #[test]
    fn raising_ricci_on_unit_sphere_gives_identity() {
        let theta = std::f64::consts::FRAC_PI_2;
        let m = s2_metric(theta);
        // On the unit S^2, Ric = g.
        let ric = m.as_tensor();
        let mixed = raise_lower(&ric, 0, &m, Direction::Up).unwrap();
        assert!((mixed.get(&[0, 0]) - 1.0).abs() < 1e-15);
        assert!((mixed.get(&[1, 1]) - 1.0).abs() < 1e-15);
        assert!(mixed.get(&[0, 1]).abs() < 1e-15);
    }

    #[test]
    fn raising_metric_gives_kronecker_delta() {
        let m = MetricAtPoint::new(3, vec![2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 0.9]).unwrap();
        let d = raise_lower(&m.as_tensor(), 0, &m, Direction::Up).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((d.get(&[i, j]) - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn raise_errors() {
        let m = MetricAtPoint::identity(3);
        let t = m.as_tensor();
        assert_eq!(raise_lower(&t, 2, &m, Direction::Up), Err(GeomError::SlotOutOfRange { slot: 2, rank: 2 }));
        assert_eq!(raise_lower(&t, 0, &m, Direction::Down), Err(GeomError::VarianceMismatch { slot: 0 }));
        assert_eq!(MetricAtPoint::new(2, vec![1.0, 2.0, 2.0, 1.0]).err(), Some(GeomError::SingularMetric));
    }

    #[test]
    fn norm_of_metric_is_dimension() {
        for n in 2..7 {
            let m = MetricAtPoint::identity(n);
            assert!((full_norm_sq(&m.as_tensor(), &m) - n as f64).abs() < 1e-14);
        }
        let m = s2_metric(0.7);
        assert!((full_norm_sq(&m.as_tensor(), &m) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn ricci_norm_on_unit_s3() {
        let m = MetricAtPoint::new(3, vec![1.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.2]).unwrap();
        let ric = m.as_tensor().scaled(2.0);
        assert!((full_norm_sq(&ric, &m) - 12.0).abs() < 1e-13);
    }

    #[test]
    fn traceless_examples() {
        let m = MetricAtPoint::identity(2);
        let t = TensorComponents::covariant(2, 2, vec![2.0, 0.0, 0.0, 0.0], Symmetry::SymmetricPair);
        let tl = traceless_part(&t, &m);
        assert_eq!(tl.data(), &[1.0, 0.0, 0.0, -1.0]);
        let g = s2_metric(0.4);
        assert!(traceless_part(&g.as_tensor(), &g).max_abs() < 1e-15);
    }

    #[test]
    fn kulkarni_nomizu_of_flat_metric() {
        let m = MetricAtPoint::identity(3);
        let gg = kulkarni_nomizu(&m.as_tensor(), &m.as_tensor()).unwrap();
        assert_eq!(gg.get(&[0, 1, 0, 1]), 2.0);
        assert_eq!(gg.get(&[0, 1, 1, 0]), -2.0);
        assert_eq!(gg.get(&[0, 0, 1, 1]), 0.0);
        let bad = kulkarni_nomizu(&m.as_tensor(), &MetricAtPoint::identity(2).as_tensor());
        assert!(bad.is_err());
    }

    #[test]
    fn contractions() {
        let m = MetricAtPoint::new(2, vec![2.0, 0.0, 0.0, 4.0]).unwrap();
        let t = TensorComponents::raw(2, 3, (0..8).map(|v| v as f64).collect());
        // contract slots 0 and 2: sum_ij g^{ij} t_{i k j}
        let c = metric_contract(&t, 0, 2, &m);
        for k in 0..2 {
            let want = 0.5 * t.get(&[0, k, 0]) + 0.25 * t.get(&[1, k, 1]);
            assert!((c.get(&[k]) - want).abs() < 1e-15);
        }
        let v = [1.0, -2.0];
        let cv = contract_vector(&t, 1, &v);
        for i in 0..2 {
            for k in 0..2 {
                let want = t.get(&[i, 0, k]) - 2.0 * t.get(&[i, 1, k]);
                assert_eq!(cv.get(&[i, k]), want);
            }
        }
    }
}
