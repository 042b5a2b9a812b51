//! Entanglement of squeezed Gaussian states under Haar-random linear optics.
//!
//! The Gaussian machinery is generic over [`Real`]; the aliases below fix
//! the common concrete choices.

pub mod analytic;
pub mod error;
pub mod gaussian;
pub mod haar;
pub mod montecarlo;
pub mod scalar;
pub mod weingarten;

pub use error::{Error, Result};
pub use scalar::Real;

pub use analytic::RationalPolynomial;
pub use weingarten::ExactRational;

pub type SqueezingConfig64 = gaussian::SqueezingConfig<f64>;
pub type CovarianceMatrix64 = gaussian::CovarianceMatrix<f64>;
pub type CovarianceMatrix32 = gaussian::CovarianceMatrix<f32>;
pub type PassiveUnitary64 = gaussian::PassiveUnitary<f64>;
pub type PassiveUnitary32 = gaussian::PassiveUnitary<f32>;
pub type SymplecticSpectrum64 = gaussian::SymplecticSpectrum<f64>;
