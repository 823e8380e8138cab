//! The warping-function ODE `φ(R/(n-1) φ + 2φ'') + (n-2)φ'^2 = λ`.

use std::fmt;
use std::io::{self, Write};

use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::profile::Profile;

/// Bisection steps used to refine a zero of `φ`.
const ZERO_BISECTIONS: usize = 60;
/// Step halvings tried before giving up on a failing RK4 step.
const MAX_HALVINGS: usize = 20;
/// Series start is handed to RK4 this many steps after a smooth-closure zero.
const SERIES_STEPS: f64 = 10.0;
/// Sub-stepping starts once the step exceeds this fraction of `φ/|φ'|`.
const ENTRY_RATIO: f64 = 0.005;
/// Near a zero, sub-steps are this fraction of the estimated distance `φ/|φ'|`.
const APPROACH_RATIO: f64 = 0.002;
/// Below this `φ/|φ'|` the remaining gap to the zero is integrated directly.
const ZERO_GAP: f64 = 1e-4;
/// Midpoint nodes of that final quadrature.
const GAP_NODES: usize = 256;
const MAX_SUBSTEPS: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OdeProblem {
    pub n: usize,
    /// Constant scalar curvature `R`.
    pub r_curv: f64,
    /// Einstein constant of the fiber.
    pub lambda: f64,
    pub phi0: f64,
    pub dphi0: f64,
    /// Where the initial data sit; must lie in `r_span`.
    pub r0: f64,
    pub r_span: (f64, f64),
    pub step: f64,
}

impl OdeProblem {
    /// Forward problem from `r = 0` on `[0, r_max]`.
    pub fn new(n: usize, r_curv: f64, lambda: f64, phi0: f64, dphi0: f64, r_max: f64, step: f64) -> Self {
        OdeProblem { n, r_curv, lambda, phi0, dphi0, r0: 0.0, r_span: (0.0, r_max), step }
    }

    /// Unit round fiber with smooth closure at `r = 0`.
    pub fn smooth_closure(n: usize, r_curv: f64, r_max: f64, step: f64) -> Self {
        Self::new(n, r_curv, n as f64 - 2.0, 0.0, 1.0, r_max, step)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(GeomError::InvalidParameter(format!("n must be ≥ 3 (got {})", self.n)));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(GeomError::InvalidParameter("step must be > 0".into()));
        }
        let (a, b) = self.r_span;
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(GeomError::InvalidParameter("r_span must be a nonempty finite interval".into()));
        }
        if !(self.r0 >= a && self.r0 <= b) {
            return Err(GeomError::InvalidParameter("r0 must lie in r_span".into()));
        }
        for (name, v) in [("R", self.r_curv), ("lambda", self.lambda), ("phi0", self.phi0), ("dphi0", self.dphi0)] {
            if !v.is_finite() {
                return Err(GeomError::InvalidParameter(format!("{name} must be finite")));
            }
        }
        if self.phi0 < 0.0 {
            return Err(GeomError::InvalidParameter("phi0 must be ≥ 0".into()));
        }
        if self.phi0 == 0.0 && (self.dphi0 != 1.0 || (self.lambda - (self.n as f64 - 2.0)).abs() > 1e-12) {
            return Err(GeomError::SingularStart { dphi0: self.dphi0, lambda: self.lambda, n: self.n });
        }
        Ok(())
    }

    fn nm2(&self) -> f64 {
        self.n as f64 - 2.0
    }

    /// `R/(n(n-1))`, the squared frequency of the closed forms.
    pub fn omega_sq(&self) -> f64 {
        let n = self.n as f64;
        self.r_curv / (n * (n - 1.0))
    }

    /// `φ''` solved from the ODE.
    pub fn ddphi(&self, phi: f64, dphi: f64) -> f64 {
        let n = self.n as f64;
        (self.lambda - self.nm2() * dphi * dphi - self.r_curv * phi * phi / (n - 1.0)) / (2.0 * phi)
    }

    /// `J = φ^{n-2} (φ'^2 - λ/(n-2) + R/(n(n-1)) φ^2)`.
    pub fn first_integral(&self, phi: f64, dphi: f64) -> f64 {
        phi.powi(self.n as i32 - 2) * (dphi * dphi - self.lambda / self.nm2() + self.omega_sq() * phi * phi)
    }
}

/// `φ(R/(n-1) φ + 2φ'') + (n-2)φ'^2 - λ`.
pub fn ode_residual(prob: &OdeProblem, _r: f64, phi: f64, dphi: f64, ddphi: f64) -> f64 {
    let n = prob.n as f64;
    phi * (prob.r_curv / (n - 1.0) * phi + 2.0 * ddphi) + (n - 2.0) * dphi * dphi - prob.lambda
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OdeNode {
    pub r: f64,
    pub phi: f64,
    pub dphi: f64,
    pub ddphi: f64,
    pub j: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OdeTrajectory {
    /// Sorted by `r`.
    pub nodes: Vec<OdeNode>,
    pub zero_crossings: Vec<f64>,
}

impl OdeTrajectory {
    pub fn first_integral(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.j).collect()
    }

    /// `max |J - J(r0)|` over the nodes, divided by the covered length.
    pub fn j_drift_per_unit(&self, reference: f64) -> f64 {
        let len = self.r_range().1 - self.r_range().0;
        let drift = self.nodes.iter().map(|n| (n.j - reference).abs()).fold(0.0, f64::max);
        if len > 0.0 {
            drift / len.max(1.0)
        } else {
            drift
        }
    }

    pub fn r_range(&self) -> (f64, f64) {
        (self.nodes.first().map_or(0.0, |n| n.r), self.nodes.last().map_or(0.0, |n| n.r))
    }

    /// `r,phi,dphi,J` with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "r,phi,dphi,J")?;
        for n in &self.nodes {
            writeln!(w, "{},{},{},{}", fmt_g17(n.r), fmt_g17(n.phi), fmt_g17(n.dphi), fmt_g17(n.j))?;
        }
        Ok(())
    }

    /// Quintic Hermite interpolant through `(φ, φ', φ'')` at the nodes.
    pub fn interpolant(&self) -> WarpInterpolant {
        WarpInterpolant { nodes: self.nodes.clone() }
    }
}

/// C-style `%.17g`.
pub fn fmt_g17(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{:.16e}", v);
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if (-4..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        strip_zeros(format!("{:.*}", decimals, v))
    } else {
        let mant = strip_zeros(mant.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    }
}

fn strip_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CaseLabel {
    Sphere,
    Euclidean,
    Hyperbolic,
    GenericWarped,
    Inconsistent,
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

type State = [f64; 2];

fn rk4(prob: &OdeProblem, y: State, h: f64) -> Option<State> {
    let rhs = |s: State| -> Option<State> {
        if !(s[0] > 0.0) {
            return None;
        }
        let d = prob.ddphi(s[0], s[1]);
        d.is_finite().then_some([s[1], d])
    };
    let add = |s: State, k: State, c: f64| [s[0] + c * k[0], s[1] + c * k[1]];
    let k1 = rhs(y)?;
    let k2 = rhs(add(y, k1, h / 2.0))?;
    let k3 = rhs(add(y, k2, h / 2.0))?;
    let k4 = rhs(add(y, k3, h))?;
    let out = [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ];
    (out[0] > 0.0 && out[1].is_finite()).then_some(out)
}

/// Root of `φ + φ's + φ''s²/2` in `(0, h]` (signed `h`), by bisection.
fn taylor_zero(phi: f64, dphi: f64, ddphi: f64, h: f64) -> Option<f64> {
    let p = |s: f64| phi + dphi * s + 0.5 * ddphi * s * s;
    if p(h) > 0.0 {
        return None;
    }
    let (mut lo, mut hi) = (0.0, h);
    for _ in 0..ZERO_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if p(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

fn node(prob: &OdeProblem, r: f64, phi: f64, dphi: f64) -> OdeNode {
    OdeNode { r, phi, dphi, ddphi: prob.ddphi(phi, dphi), j: prob.first_integral(phi, dphi) }
}

/// March from `start` towards `end`, stopping at a zero of `φ`.
fn march(prob: &OdeProblem, start: OdeNode, end: f64) -> Result<(Vec<OdeNode>, Option<f64>)> {
    let j0 = prob.first_integral(prob.phi0, prob.dphi0);
    let dir = if end >= start.r { 1.0 } else { -1.0 };
    let mut out = vec![start];
    let mut cur = start;
    let total = (end - start.r).abs();
    let steps = (total / prob.step).ceil() as usize;
    let mut k = 0usize;
    while k < steps {
        let target = if k + 1 == steps { end } else { start.r + dir * prob.step * (k + 1) as f64 };
        let h = target - cur.r;
        if h == 0.0 {
            k += 1;
            continue;
        }
        if dir * cur.dphi < 0.0 && ENTRY_RATIO * cur.phi < prob.step * cur.dphi.abs() {
            // the fixed step no longer resolves the approach to a zero
            if let Some(z) = approach(prob, &mut cur, target, dir, j0, &mut out)? {
                return Ok((out, Some(z)));
            }
            k += 1;
            continue;
        }
        match rk4(prob, [cur.phi, cur.dphi], h) {
            Some(y) => {
                cur = node(prob, target, y[0], y[1]);
                out.push(cur);
                k += 1;
            }
            None => {
                if let Some(s) = taylor_zero(cur.phi, cur.dphi, cur.ddphi, h) {
                    return Ok((out, Some(cur.r + s)));
                }
                // no bracket at this resolution: creep forward with smaller steps
                let mut sub = h;
                let mut advanced = false;
                for _ in 0..MAX_HALVINGS {
                    sub *= 0.5;
                    if let Some(y) = rk4(prob, [cur.phi, cur.dphi], sub) {
                        cur = node(prob, cur.r + sub, y[0], y[1]);
                        out.push(cur);
                        advanced = true;
                        break;
                    }
                    if let Some(s) = taylor_zero(cur.phi, cur.dphi, cur.ddphi, sub) {
                        return Ok((out, Some(cur.r + s)));
                    }
                }
                if !advanced {
                    return Err(GeomError::IntegrationFailure {
                        r: cur.r,
                        reason: "phi approaches zero without a sign-change bracket".into(),
                    });
                }
            }
        }
    }
    Ok((out, None))
}

/// `∫_0^φ dψ/|φ'(ψ)|` with `φ'^2 = J ψ^{2-n} + λ/(n-2) - R/(n(n-1)) ψ^2`.
fn gap_to_zero(prob: &OdeProblem, j: f64, phi: f64) -> Option<f64> {
    let a = prob.lambda / prob.nm2();
    let b = prob.omega_sq();
    let e = prob.n as f64 - 2.0;
    let mut sum = 0.0;
    for k in 0..GAP_NODES {
        let psi = phi * (k as f64 + 0.5) / GAP_NODES as f64;
        // ψ^{e/2} / sqrt(J + (a - bψ²) ψ^e), finite for J >= 0
        let rad = j + (a - b * psi * psi) * psi.powf(e);
        if !(rad > 0.0) {
            return None;
        }
        sum += psi.powf(e / 2.0) / rad.sqrt();
    }
    Some(sum * phi / GAP_NODES as f64)
}

/// Sub-steps proportional to the distance to the zero until either the zero
/// is reached or `target` is. Returns the zero if found.
fn approach(
    prob: &OdeProblem,
    cur: &mut OdeNode,
    target: f64,
    dir: f64,
    j0: f64,
    out: &mut Vec<OdeNode>,
) -> Result<Option<f64>> {
    for _ in 0..MAX_SUBSTEPS {
        let remaining = target - cur.r;
        if remaining * dir <= 0.0 {
            return Ok(None);
        }
        if dir * cur.dphi >= 0.0 {
            // turned away from zero; finish the macro step normally
            let Some(y) = rk4(prob, [cur.phi, cur.dphi], remaining) else { break };
            *cur = node(prob, target, y[0], y[1]);
            out.push(*cur);
            return Ok(None);
        }
        let dist = cur.phi / cur.dphi.abs();
        if dist < ZERO_GAP {
            return Ok(Some(cur.r + dir * gap_to_zero(prob, j0, cur.phi).unwrap_or(dist)));
        }
        let s = if (APPROACH_RATIO * dist) < remaining.abs() { dir * APPROACH_RATIO * dist } else { remaining };
        let Some(y) = rk4(prob, [cur.phi, cur.dphi], s) else { break };
        *cur = node(prob, cur.r + s, y[0], y[1]);
        out.push(*cur);
    }
    Err(GeomError::IntegrationFailure { r: cur.r, reason: "zero approach did not converge".into() })
}

/// Classical RK4 at fixed step with zero detection on both sides of `r0`.
pub fn integrate(prob: &OdeProblem) -> Result<OdeTrajectory> {
    prob.validate()?;
    let (lo, hi) = prob.r_span;
    let mut zeros = Vec::new();
    if prob.phi0 == 0.0 {
        // smooth closure: follow the J = 0 branch through the series
        let w2 = prob.omega_sq();
        let mut nodes = Vec::new();
        let r_hand = (prob.r0 + SERIES_STEPS * prob.step).min(hi);
        let m = ((r_hand - prob.r0) / prob.step).round().max(1.0) as usize;
        zeros.push(prob.r0);
        nodes.push(OdeNode { r: prob.r0, phi: 0.0, dphi: 1.0, ddphi: 0.0, j: 0.0 });
        for k in 1..=m {
            let s = (r_hand - prob.r0) * k as f64 / m as f64;
            let phi = s - w2 * s.powi(3) / 6.0 + w2 * w2 * s.powi(5) / 120.0;
            let dphi = 1.0 - w2 * s * s / 2.0 + w2 * w2 * s.powi(4) / 24.0;
            nodes.push(node(prob, prob.r0 + s, phi, dphi));
        }
        let last = *nodes.last().expect("series nodes");
        if last.r < hi {
            let (more, z) = march(prob, last, hi)?;
            nodes.extend(more.into_iter().skip(1));
            zeros.extend(z);
        }
        return Ok(OdeTrajectory { nodes, zero_crossings: zeros });
    }
    let start = node(prob, prob.r0, prob.phi0, prob.dphi0);
    let (fwd, zf) = if prob.r0 < hi { march(prob, start, hi)? } else { (vec![start], None) };
    let (bwd, zb) = if prob.r0 > lo { march(prob, start, lo)? } else { (vec![start], None) };
    let mut nodes: Vec<OdeNode> = bwd.into_iter().skip(1).rev().collect();
    nodes.extend(fwd);
    zeros.extend(zb);
    zeros.extend(zf);
    Ok(OdeTrajectory { nodes, zero_crossings: zeros })
}

/// `sqrt(n(n-1)/R) sin(sqrt(R/(n(n-1))) r)`, `r`, or the `sinh` analogue,
/// returned as `r -> (φ, φ')`.
pub fn closed_form(r_curv: f64, n: usize) -> impl Fn(f64) -> (f64, f64) {
    let nf = n as f64;
    let w2 = r_curv / (nf * (nf - 1.0));
    let w = w2.abs().sqrt();
    move |r: f64| {
        if w2 > 0.0 {
            ((w * r).sin() / w, (w * r).cos())
        } else if w2 < 0.0 {
            ((w * r).sinh() / w, (w * r).cosh())
        } else {
            (r, 1.0)
        }
    }
}

pub fn classify(prob: &OdeProblem, traj: &OdeTrajectory) -> CaseLabel {
    let r = prob.r_curv;
    match traj.zero_crossings.len() {
        0 => CaseLabel::GenericWarped,
        1 if r == 0.0 => CaseLabel::Euclidean,
        1 if r < 0.0 => CaseLabel::Hyperbolic,
        2 if r > 0.0 => CaseLabel::Sphere,
        _ => CaseLabel::Inconsistent,
    }
}

/// The general ODE specialised to `n = 3, 4` with a unit round fiber.
#[derive(Debug, Clone)]
pub struct SpecialCase {
    pub template: OdeProblem,
    /// Ratio between the general residual and the specialised one.
    pub factor: f64,
    special: fn(f64, f64, f64, f64) -> f64,
}

impl SpecialCase {
    /// Residual of the specialised form at curvature `r_curv`.
    pub fn residual(&self, r_curv: f64, phi: f64, dphi: f64, ddphi: f64) -> f64 {
        (self.special)(r_curv, phi, dphi, ddphi)
    }
}

fn four_dim_form(r: f64, phi: f64, dphi: f64, ddphi: f64) -> f64 {
    phi * (ddphi + r / 6.0 * phi) + dphi * dphi - 1.0
}

fn three_dim_form(r: f64, phi: f64, dphi: f64, ddphi: f64) -> f64 {
    phi * (2.0 * ddphi + r / 2.0 * phi) + dphi * dphi - 1.0
}

pub fn special_case_odes(n: usize) -> Result<SpecialCase> {
    let (special, factor): (fn(f64, f64, f64, f64) -> f64, f64) = match n {
        3 => (three_dim_form, 1.0),
        4 => (four_dim_form, 2.0),
        _ => return Err(GeomError::InvalidParameter(format!("special forms exist for n = 3, 4 only (got {n})"))),
    };
    Ok(SpecialCase { template: OdeProblem::smooth_closure(n, 0.0, 1.0, 1e-3), factor, special })
}

/// Piecewise quintic Hermite interpolant of a trajectory; `C²` at the nodes.
#[derive(Debug, Clone)]
pub struct WarpInterpolant {
    nodes: Vec<OdeNode>,
}

impl Profile for WarpInterpolant {
    fn jet(&self, x: f64) -> [f64; 3] {
        let nodes = &self.nodes;
        if nodes.len() == 1 {
            let a = nodes[0];
            return [a.phi, a.dphi, a.ddphi];
        }
        let i = nodes.partition_point(|nd| nd.r <= x).clamp(1, nodes.len() - 1);
        let (a, b) = (nodes[i - 1], nodes[i]);
        let h = b.r - a.r;
        let t = (x - a.r) / h;
        // basis values and derivatives in t
        let t2 = t * t;
        let t3 = t2 * t;
        let t4 = t3 * t;
        let t5 = t4 * t;
        let h0 = [1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5, -30.0 * t2 + 60.0 * t3 - 30.0 * t4, -60.0 * t + 180.0 * t2 - 120.0 * t3];
        let h1 = [t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5, 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4, -36.0 * t + 96.0 * t2 - 60.0 * t3];
        let h2 = [
            0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5),
            0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4),
            0.5 * (2.0 - 18.0 * t + 36.0 * t2 - 20.0 * t3),
        ];
        let h3 = [10.0 * t3 - 15.0 * t4 + 6.0 * t5, 30.0 * t2 - 60.0 * t3 + 30.0 * t4, 60.0 * t - 180.0 * t2 + 120.0 * t3];
        let h4 = [-4.0 * t3 + 7.0 * t4 - 3.0 * t5, -12.0 * t2 + 28.0 * t3 - 15.0 * t4, -24.0 * t + 84.0 * t2 - 60.0 * t3];
        let h5 = [
            0.5 * (t3 - 2.0 * t4 + t5),
            0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4),
            0.5 * (6.0 * t - 24.0 * t2 + 20.0 * t3),
        ];
        let mut out = [0.0; 3];
        for (d, o) in out.iter_mut().enumerate() {
            let v = a.phi * h0[d]
                + h * a.dphi * h1[d]
                + h * h * a.ddphi * h2[d]
                + b.phi * h3[d]
                + h * b.dphi * h4[d]
                + h * h * b.ddphi * h5[d];
            *o = v / h.powi(d as i32);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn residual_examples() {
        let p = OdeProblem::new(4, 12.0, 2.0, 0.0, 1.0, 1.0, 1e-3);
        let r = 0.7f64;
        assert!(ode_residual(&p, r, r.sin(), r.cos(), -r.sin()).abs() < 1e-12);
        let p = OdeProblem::new(4, 0.0, 2.0, 0.0, 1.0, 1.0, 1e-3);
        assert_eq!(ode_residual(&p, r, r, 1.0, 0.0), 0.0);
        let p = OdeProblem::new(5, -20.0, 3.0, 0.0, 1.0, 1.0, 1e-3);
        assert!(ode_residual(&p, r, r.sinh(), r.cosh(), r.sinh()).abs() < 1e-12);
    }

    #[test]
    fn sphere_case_closes_at_pi() {
        let p = OdeProblem::smooth_closure(4, 12.0, 4.0, 1e-3);
        let t = integrate(&p).unwrap();
        assert_eq!(t.zero_crossings.len(), 2);
        assert!((t.zero_crossings[1] - PI).abs() < 1e-6, "{:?}", t.zero_crossings);
        let err = t.nodes.iter().map(|n| (n.phi - n.r.sin()).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
        assert_eq!(classify(&p, &t), CaseLabel::Sphere);
    }

    #[test]
    fn flat_and_hyperbolic_cases() {
        let p = OdeProblem::smooth_closure(4, 0.0, 10.0, 1e-3);
        let t = integrate(&p).unwrap();
        assert!(t.nodes.iter().all(|n| (n.phi - n.r).abs() < 1e-12));
        assert_eq!(classify(&p, &t), CaseLabel::Euclidean);
        let p = OdeProblem::smooth_closure(4, -12.0, 3.0, 1e-3);
        let t = integrate(&p).unwrap();
        let err = t.nodes.iter().map(|n| (n.phi - n.r.sinh()).abs()).fold(0.0, f64::max);
        assert!(err < 1e-7, "{err}");
        assert_eq!(classify(&p, &t), CaseLabel::Hyperbolic);
    }

    #[test]
    fn generic_and_inconsistent() {
        let p = OdeProblem { r0: 0.0, r_span: (-4.0, 4.0), ..OdeProblem::new(4, -5.0, 2.0, 1.0, 0.0, 4.0, 1e-3) };
        let t = integrate(&p).unwrap();
        assert!(t.zero_crossings.is_empty());
        assert_eq!(t.r_range(), (-4.0, 4.0));
        assert_eq!(classify(&p, &t), CaseLabel::GenericWarped);
        let p = OdeProblem { r0: 0.0, r_span: (-4.0, 4.0), ..OdeProblem::new(4, -12.0, -10.0, 1.0, 0.0, 4.0, 1e-3) };
        let t = integrate(&p).unwrap();
        assert_eq!(t.zero_crossings.len(), 2);
        assert_eq!(classify(&p, &t), CaseLabel::Inconsistent);
    }

    #[test]
    fn singular_start_needs_unit_slope() {
        let p = OdeProblem::new(4, 12.0, 2.0, 0.0, 0.5, 4.0, 1e-3);
        assert!(matches!(integrate(&p), Err(GeomError::SingularStart { .. })));
        assert!(GeomError::SingularStart { dphi0: 0.5, lambda: 2.0, n: 4 }.to_string().contains("smooth closure"));
    }

    #[test]
    fn first_integral_is_conserved() {
        let p = OdeProblem { r0: 0.0, r_span: (-4.0, 4.0), ..OdeProblem::new(4, -5.0, 2.0, 1.0, 0.0, 4.0, 1e-3) };
        let t = integrate(&p).unwrap();
        let j0 = p.first_integral(1.0, 0.0);
        assert!(t.j_drift_per_unit(j0) < 1e-9 * j0.abs().max(1.0));
    }

    #[test]
    fn special_forms_are_proportional() {
        for n in [3, 4] {
            let sc = special_case_odes(n).unwrap();
            let p = OdeProblem { r_curv: 1.7, ..sc.template.clone() };
            for k in 0..20 {
                let (a, b, c) = (0.3 + 0.1 * k as f64, -0.5 + 0.07 * k as f64, 1.1 - 0.13 * k as f64);
                let g = ode_residual(&p, 0.0, a, b, c);
                assert!((g / sc.factor - sc.residual(1.7, a, b, c)).abs() < 1e-12);
            }
        }
        assert!(special_case_odes(5).is_err());
    }

    #[test]
    fn interpolant_is_accurate() {
        let p = OdeProblem::smooth_closure(4, 12.0, 3.0, 1e-3);
        let t = integrate(&p).unwrap();
        let s = t.interpolant();
        for k in 1..50 {
            let x = 0.1 + 0.05 * k as f64 + 0.0031;
            let j = s.jet(x);
            assert!((j[0] - x.sin()).abs() < 1e-8);
            assert!((j[1] - x.cos()).abs() < 1e-7);
            assert!((j[2] + x.sin()).abs() < 1e-6, "{x} {:?}", (j[0] - x.sin(), j[1] - x.cos(), j[2] + x.sin()));
        }
    }

    #[test]
    fn g17_formatting() {
        assert_eq!(fmt_g17(0.1), "0.10000000000000001");
        assert_eq!(fmt_g17(1.0), "1");
        assert_eq!(fmt_g17(3.0e-7), "2.9999999999999999e-07");
        assert_eq!(fmt_g17(1e20), "1e+20");
        assert_eq!(fmt_g17(-2.5), "-2.5");
        assert_eq!(fmt_g17(PI), "3.1415926535897931");
    }
}
