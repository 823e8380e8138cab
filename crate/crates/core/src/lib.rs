//! Curvature identities of V-static metrics: tensors on coordinate charts,
//! a catalogue of model metrics, finite-difference curvature, residuals of
//! the V-static system and its consequences, and the warping-function ODE.

pub mod battery;
pub mod curvature;
pub mod error;
pub mod fd;
pub mod model;
pub mod ode;
pub mod profile;
pub mod report;
pub mod sampling;
pub mod suite;
pub mod sweep;
pub mod tensor;
pub mod tolerance;
pub mod vstatic;

pub use error::{GeomError, Result};
