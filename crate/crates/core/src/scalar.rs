//! Floating-point scalars the Gaussian machinery can run on.

use nalgebra::RealField;

/// A real scalar usable for covariance-matrix work.
///
/// The tolerance hooks scale the fixed double-precision thresholds to
/// what the type can actually resolve.
pub trait Real: RealField + Copy + Send + Sync {
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    fn to_f64(self) -> f64;

    /// Relative symmetry tolerance for covariance matrices.
    fn symmetry_tol() -> Self;

    /// Max-norm tolerance on `U†U - I`.
    fn unitarity_tol() -> Self;

    /// Symplectic eigenvalues in `[1 - purity_tol, 1)` are clamped to 1.
    fn purity_tol() -> Self;

    /// Relative gap allowed between the two copies of each `ν²`.
    fn pairing_tol() -> Self;

    /// Entropies in `[-entropy_floor, 0)` are rounded up to zero.
    fn entropy_floor() -> Self;
}

impl Real for f64 {
    fn to_f64(self) -> f64 {
        self
    }
    fn symmetry_tol() -> Self {
        1e-12
    }
    fn unitarity_tol() -> Self {
        1e-12
    }
    fn purity_tol() -> Self {
        1e-9
    }
    fn pairing_tol() -> Self {
        1e-8
    }
    fn entropy_floor() -> Self {
        1e-10
    }
}

impl Real for f32 {
    fn to_f64(self) -> f64 {
        self as f64
    }
    fn symmetry_tol() -> Self {
        1e-5
    }
    fn unitarity_tol() -> Self {
        1e-5
    }
    fn purity_tol() -> Self {
        1e-4
    }
    fn pairing_tol() -> Self {
        1e-3
    }
    fn entropy_floor() -> Self {
        1e-4
    }
}
