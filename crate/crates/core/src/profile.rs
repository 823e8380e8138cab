//! One-variable functions carrying their first two derivatives.

use std::fmt::Debug;
use std::sync::Arc;

/// A smooth function of one coordinate, `jet(x) = [f, f', f'']`.
pub trait Profile: Send + Sync + Debug {
    fn jet(&self, x: f64) -> [f64; 3];

    fn value(&self, x: f64) -> f64 {
        self.jet(x)[0]
    }
}

pub type SharedProfile = Arc<dyn Profile>;

#[derive(Debug, Clone, Copy)]
pub struct Constant(pub f64);

impl Profile for Constant {
    fn jet(&self, _x: f64) -> [f64; 3] {
        [self.0, 0.0, 0.0]
    }
}

/// `slope * x + offset`
#[derive(Debug, Clone, Copy)]
pub struct Linear {
    pub slope: f64,
    pub offset: f64,
}

impl Profile for Linear {
    fn jet(&self, x: f64) -> [f64; 3] {
        [self.slope * x + self.offset, self.slope, 0.0]
    }
}

/// `amp * sin(freq * x)`
#[derive(Debug, Clone, Copy)]
pub struct Sine {
    pub amp: f64,
    pub freq: f64,
}

impl Profile for Sine {
    fn jet(&self, x: f64) -> [f64; 3] {
        let (s, c) = (self.freq * x).sin_cos();
        let w = self.freq;
        [self.amp * s, self.amp * w * c, -self.amp * w * w * s]
    }
}

/// `amp * cos(freq * x)`
#[derive(Debug, Clone, Copy)]
pub struct Cosine {
    pub amp: f64,
    pub freq: f64,
}

impl Profile for Cosine {
    fn jet(&self, x: f64) -> [f64; 3] {
        let (s, c) = (self.freq * x).sin_cos();
        let w = self.freq;
        [self.amp * c, -self.amp * w * s, -self.amp * w * w * c]
    }
}

/// `amp * sinh(freq * x)`
#[derive(Debug, Clone, Copy)]
pub struct HypSine {
    pub amp: f64,
    pub freq: f64,
}

impl Profile for HypSine {
    fn jet(&self, x: f64) -> [f64; 3] {
        let w = self.freq;
        let (s, c) = ((w * x).sinh(), (w * x).cosh());
        [self.amp * s, self.amp * w * c, self.amp * w * w * s]
    }
}

/// `amp * cosh(freq * x)`
#[derive(Debug, Clone, Copy)]
pub struct HypCosine {
    pub amp: f64,
    pub freq: f64,
}

impl Profile for HypCosine {
    fn jet(&self, x: f64) -> [f64; 3] {
        let w = self.freq;
        let (s, c) = ((w * x).sinh(), (w * x).cosh());
        [self.amp * c, self.amp * w * s, self.amp * w * w * c]
    }
}

/// Square of another profile.
#[derive(Debug, Clone)]
pub struct Squared(pub SharedProfile);

impl Profile for Squared {
    fn jet(&self, x: f64) -> [f64; 3] {
        let [u, du, ddu] = self.0.jet(x);
        [u * u, 2.0 * u * du, 2.0 * (du * du + u * ddu)]
    }
}

pub fn shared<P: Profile + 'static>(p: P) -> SharedProfile {
    Arc::new(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fd::derivative_1d;

    #[test]
    fn jets_match_finite_differences() {
        let ps: Vec<SharedProfile> = vec![
            shared(Sine { amp: 1.3, freq: 0.7 }),
            shared(Cosine { amp: -0.4, freq: 2.0 }),
            shared(HypSine { amp: 0.5, freq: 1.1 }),
            shared(HypCosine { amp: 1.0, freq: 3f64.sqrt() }),
            shared(Linear { slope: 2.0, offset: -1.0 }),
            shared(Squared(shared(Cosine { amp: 1.0, freq: 1.0 }))),
        ];
        for p in &ps {
            for &x in &[-0.8, 0.1, 1.7] {
                let [_, d1, d2] = p.jet(x);
                let fd1 = derivative_1d(|y| p.value(y), x, 1e-2, 2);
                let fd2 = derivative_1d(|y| p.jet(y)[1], x, 1e-2, 2);
                assert!((d1 - fd1).abs() < 1e-9, "{p:?} d1");
                assert!((d2 - fd2).abs() < 1e-9, "{p:?} d2");
            }
        }
    }
}
