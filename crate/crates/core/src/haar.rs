//! Reproducible Haar-random unitaries.

use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::gaussian::PassiveUnitary;
use crate::scalar::Real;

/// Identifier of the generator behind every [`SeededStream`].
pub const RNG_ALGORITHM: &str = "chacha20/rand_chacha-0.9/seed_from_u64+stream";

/// A reproducible random stream: ChaCha20 keyed by `master_seed`
/// (expanded with `SeedableRng::seed_from_u64`), using `stream_index` as
/// the ChaCha stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeededStream {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl SeededStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self { master_seed, stream_index }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// MurmurHash3's 64-bit finalizer (a bijection on `u64`).
fn fmix64(mut x: u64) -> u64 {
    x ^= x >> 33;
    x = x.wrapping_mul(0xff51_afd7_ed55_8ccd);
    x ^= x >> 33;
    x = x.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    x ^= x >> 33;
    x
}

/// Child stream for `worker`: same master seed, stream index
/// `(fmix64(parent_index) & 0xFFFF_FFFF_0000_0000) | worker`.
///
/// The low 32 bits are the worker id, so children of one parent never
/// collide.
pub fn derive_substream(stream: SeededStream, worker: u32) -> SeededStream {
    let high = fmix64(stream.stream_index) & 0xFFFF_FFFF_0000_0000;
    SeededStream::new(stream.master_seed, high | worker as u64)
}

/// Independent master seed for a labelled sub-experiment (a ladder point,
/// the bootstrap, ...): `fmix64(master ^ fmix64(label + 1))`.
pub fn mix_seed(master: u64, label: u64) -> u64 {
    fmix64(master ^ fmix64(label.wrapping_add(1)))
}

fn complex_gaussian<T: Real, R: Rng>(rng: &mut R) -> Complex<T>
where
    StandardNormal: Distribution<T>,
{
    let scale = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    let re: T = StandardNormal.sample(rng);
    let im: T = StandardNormal.sample(rng);
    Complex::new(re * scale, im * scale)
}

/// `n × n` matrix of i.i.d. standard complex Gaussians, drawn row by row.
pub fn sample_ginibre<T: Real>(n: usize, stream: SeededStream) -> DMatrix<Complex<T>>
where
    StandardNormal: Distribution<T>,
{
    let mut rng = stream.rng();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = complex_gaussian(&mut rng);
        }
    }
    g
}

/// Haar-distributed `n × n` unitary: QR of a Ginibre matrix with the
/// columns of `Q` rephased so that `R` has a positive diagonal.
pub fn sample_haar_unitary<T: Real>(n: usize, stream: SeededStream) -> PassiveUnitary<T>
where
    StandardNormal: Distribution<T>,
{
    sample_qr_unitary(n, stream, true)
}

/// Same as [`sample_haar_unitary`] but the phase correction can be turned
/// off. Without it the result is unitary but not Haar distributed: the
/// factorization follows the LAPACK convention, whose `R` has a real
/// diagonal of sign `-sign(Re g_jj)`.
pub fn sample_qr_unitary<T: Real>(n: usize, stream: SeededStream, fix_phases: bool) -> PassiveUnitary<T>
where
    StandardNormal: Distribution<T>,
{
    assert!(n >= 1, "unitary dimension must be positive");
    let (mut q, diag) = householder_qr(sample_ginibre::<T>(n, stream));
    if fix_phases {
        for (j, d) in diag.iter().enumerate() {
            if *d < T::zero() {
                for x in q.column_mut(j).iter_mut() {
                    *x = -*x;
                }
            }
        }
    }
    PassiveUnitary::from_trusted(q)
}

/// Householder QR with LAPACK's reflector choice (`zlarfg`). Returns `Q`
/// and the (real) diagonal of `R`; the rest of `R` is not needed.
fn householder_qr<T: Real>(mut a: DMatrix<Complex<T>>) -> (DMatrix<Complex<T>>, Vec<T>) {
    let n = a.nrows();
    let mut vs: Vec<(DVector<Complex<T>>, Complex<T>)> = Vec::with_capacity(n);
    let mut diag = Vec::with_capacity(n);
    for k in 0..n {
        let alpha = a[(k, k)];
        let tail: T = (k + 1..n).map(|i| a[(i, k)].norm_sqr()).fold(T::zero(), |x, y| x + y);
        if tail == T::zero() && alpha.im == T::zero() {
            // Already reduced; H = I.
            diag.push(alpha.re);
            vs.push((DVector::zeros(n - k), Complex::new(T::zero(), T::zero())));
            continue;
        }
        let norm = (alpha.norm_sqr() + tail).sqrt();
        let beta = if alpha.re >= T::zero() { -norm } else { norm };
        let tau = (Complex::new(beta, T::zero()) - alpha).unscale(beta);
        let scale = Complex::new(T::one(), T::zero()) / (alpha - Complex::new(beta, T::zero()));
        let mut v = DVector::zeros(n - k);
        v[0] = Complex::new(T::one(), T::zero());
        for i in k + 1..n {
            v[i - k] = a[(i, k)] * scale;
        }
        // A <- H^† A on the trailing columns, H = I - τ v v^†.
        let tau_c = tau.conj();
        for j in k + 1..n {
            let mut col = a.view_mut((k, j), (n - k, 1));
            let dot = v.dotc(&col);
            col.zip_apply(&v, |x, vi| *x -= vi * tau_c * dot);
        }
        diag.push(beta);
        vs.push((v, tau));
    }
    // Q = H_0 H_1 ... H_{n-1}, accumulated from the right.
    let mut q = DMatrix::<Complex<T>>::identity(n, n);
    for (k, (v, tau)) in vs.iter().enumerate().rev() {
        if tau.re == T::zero() && tau.im == T::zero() {
            continue;
        }
        for j in k..n {
            let mut col = q.view_mut((k, j), (n - k, 1));
            let dot = v.dotc(&col);
            col.zip_apply(v, |x, vi| *x -= vi * *tau * dot);
        }
    }
    (q, diag)
}

/// The first `k` rows of a Haar unitary on `n` modes, as a `k × n` matrix.
///
/// Orthonormalizes `k` Gaussian rows by Gram–Schmidt (with a second pass),
/// which has the same law as truncating [`sample_haar_unitary`] but costs
/// `O(k²n)` instead of `O(n³)`.
pub fn sample_haar_rows<T: Real>(n: usize, k: usize, stream: SeededStream) -> DMatrix<Complex<T>>
where
    StandardNormal: Distribution<T>,
{
    assert!(k <= n, "cannot draw more than n orthonormal rows");
    let mut rng = stream.rng();
    let mut rows: Vec<DVector<Complex<T>>> = Vec::with_capacity(k);
    while rows.len() < k {
        let mut v = DVector::from_fn(n, |_, _| complex_gaussian::<T, _>(&mut rng));
        for _pass in 0..2 {
            for r in &rows {
                let overlap = r.dotc(&v);
                v -= r * overlap;
            }
        }
        let norm = v.norm();
        // A Gaussian vector lands in the span of the previous rows with
        // probability zero; redraw if rounding makes it degenerate.
        if norm > T::lit(1e-6) {
            rows.push(v.unscale(norm));
        }
    }
    DMatrix::from_fn(k, n, |i, j| rows[i][j])
}
