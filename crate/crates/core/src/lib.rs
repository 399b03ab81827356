//! Numerical toolkit for the nonlinear Klein-Gordon equation
//! `∂²u - Δu - m²u + u^{2p+1} = 0` on compact flat manifolds, centred on the
//! homoclinic loop of the space-independent dynamics and its center-stable
//! and center manifolds.

pub mod error;
pub mod evolve;
pub mod fit;
pub mod homoclinic;
pub mod linearized;
pub mod manifolds;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{HyperbolicPoint, ManifoldKind, Model, ModelParams, Spectrum, State};
