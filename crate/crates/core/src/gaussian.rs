//! Covariance matrices of zero-mean Gaussian states, passive evolution,
//! reduction to subsystems, symplectic spectra and entropies.
//!
//! Quadratures are always ordered `(x_1..x_m, p_1..p_m)`.

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{input, numerical, Result};
use crate::scalar::Real;

/// Single-mode squeezing parameters, one per mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqueezingConfig<T> {
    values: Vec<T>,
}

impl<T: Real> SqueezingConfig<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return input("squeezing config needs at least one mode");
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return input(format!("squeezing parameter {i} is not finite"));
        }
        Ok(Self { values })
    }

    /// `n` modes all squeezed by `s`.
    pub fn equal(n: usize, s: T) -> Result<Self> {
        Self::new(vec![s; n])
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `Some(s)` when every mode carries the same squeezing.
    pub fn uniform_value(&self) -> Option<T> {
        let first = self.values[0];
        self.values.iter().all(|&v| v == first).then_some(first)
    }

    /// Average photon number per mode, `(1/n) Σ sinh²(s_i)`.
    pub fn mean_boson_number(&self) -> T {
        let total = self
            .values
            .iter()
            .fold(T::zero(), |acc, &s| acc + s.sinh() * s.sinh());
        total / T::lit(self.values.len() as f64)
    }
}

/// Real symmetric positive-definite `2m × 2m` second-moment matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix<T: Real> {
    entries: DMatrix<T>,
}

impl<T: Real> CovarianceMatrix<T> {
    /// Validates shape and symmetry. Positivity and the uncertainty bound
    /// are only checked by the operations that depend on them.
    pub fn new(entries: DMatrix<T>) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows != cols || rows == 0 || rows % 2 != 0 {
            return input(format!("covariance matrix must be 2m x 2m, got {rows} x {cols}"));
        }
        let scale = entries.amax().max(T::one());
        for i in 0..rows {
            for j in 0..i {
                let gap = (entries[(i, j)] - entries[(j, i)]).abs();
                if !(gap <= T::symmetry_tol() * scale) {
                    return input(format!("covariance matrix not symmetric at ({i}, {j})"));
                }
            }
        }
        Ok(Self { entries })
    }

    pub(crate) fn from_trusted(entries: DMatrix<T>) -> Self {
        Self { entries }
    }

    pub fn identity(modes: usize) -> Self {
        Self::from_trusted(DMatrix::identity(2 * modes, 2 * modes))
    }

    pub fn dim_modes(&self) -> usize {
        self.entries.nrows() / 2
    }

    pub fn entries(&self) -> &DMatrix<T> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<T> {
        self.entries
    }
}

/// `n × n` unitary describing a linear-optical network.
#[derive(Debug, Clone, PartialEq)]
pub struct PassiveUnitary<T: Real> {
    entries: DMatrix<Complex<T>>,
}

impl<T: Real> PassiveUnitary<T> {
    pub fn new(entries: DMatrix<Complex<T>>) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return input("unitary must be a non-empty square matrix");
        }
        let defect = unitarity_defect(&entries);
        if !(defect <= T::unitarity_tol()) {
            return input(format!(
                "matrix is not unitary: max |U†U - I| = {:e}",
                defect.to_f64()
            ));
        }
        Ok(Self { entries })
    }

    pub(crate) fn from_trusted(entries: DMatrix<Complex<T>>) -> Self {
        Self { entries }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_trusted(DMatrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex<T>> {
        &self.entries
    }

    /// Real orthogonal-symplectic image `[[Re U, Im U], [-Im U, Re U]]`.
    pub fn eta(&self) -> DMatrix<T> {
        let n = self.dim();
        let mut out = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let z = self.entries[(i, j)];
                out[(i, j)] = z.re;
                out[(i, n + j)] = z.im;
                out[(n + i, j)] = -z.im;
                out[(n + i, n + j)] = z.re;
            }
        }
        out
    }
}

/// `max |U†U - I|` over all entries.
pub fn unitarity_defect<T: Real>(u: &DMatrix<Complex<T>>) -> T {
    let gram = u.adjoint() * u;
    let mut worst = T::zero();
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let target = if i == j { Complex::new(T::one(), T::zero()) } else { Complex::new(T::zero(), T::zero()) };
            let d = (gram[(i, j)] - target).norm_sqr().sqrt();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Symplectic eigenvalues of a subsystem, sorted descending, all `≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpectrum<T> {
    values: Vec<T>,
}

impl<T: Real> SymplecticSpectrum<T> {
    pub fn new(mut values: Vec<T>) -> Result<Self> {
        if values.iter().any(|v| !(*v >= T::one())) {
            return input("symplectic eigenvalues must be >= 1");
        }
        values.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Ok(Self { values })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }
}

/// Which entropy `h_j` to use: von Neumann (`1`) or Rényi-2 (`2`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EntropyOrder {
    VonNeumann,
    Renyi2,
}

/// `σ₀ = diag(e^{2s_i}) ⊕ diag(e^{-2s_i})`.
pub fn build_initial_covariance<T: Real>(config: &SqueezingConfig<T>) -> CovarianceMatrix<T> {
    let n = config.len();
    let mut diag = DVector::zeros(2 * n);
    for (i, &s) in config.values().iter().enumerate() {
        let two_s = s + s;
        diag[i] = two_s.exp();
        diag[n + i] = (-two_s).exp();
    }
    CovarianceMatrix::from_trusted(DMatrix::from_diagonal(&diag))
}

/// `η(U) σ₀ η(U)ᵀ`.
pub fn evolve<T: Real>(sigma0: &CovarianceMatrix<T>, u: &PassiveUnitary<T>) -> Result<CovarianceMatrix<T>> {
    if sigma0.dim_modes() != u.dim() {
        return input(format!(
            "covariance has {} modes but unitary acts on {}",
            sigma0.dim_modes(),
            u.dim()
        ));
    }
    let eta = u.eta();
    let s = sigma0.entries();
    let diagonal = (0..s.nrows()).all(|i| (0..s.ncols()).all(|j| i == j || s[(i, j)] == T::zero()));
    let out = if diagonal {
        // η D ηᵀ = (η √D)(η √D)ᵀ: one product instead of two.
        let mut half = eta;
        for (j, mut col) in half.column_iter_mut().enumerate() {
            col *= s[(j, j)].sqrt();
        }
        let mut out = DMatrix::zeros(s.nrows(), s.nrows());
        out.gemm(T::one(), &half, &half.transpose(), T::zero());
        out
    } else {
        &eta * s * eta.transpose()
    };
    Ok(CovarianceMatrix::from_trusted(symmetrize(out)))
}

fn symmetrize<T: Real>(mut m: DMatrix<T>) -> DMatrix<T> {
    let half = T::lit(0.5);
    for i in 0..m.nrows() {
        for j in 0..i {
            let v = (m[(i, j)] + m[(j, i)]) * half;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Reduced covariance of the first `k` modes straight from the first `k`
/// rows of the unitary (a `k × n` matrix) and diagonal squeezing, without
/// forming the full `2n × 2n` state.
pub fn evolve_reduced<T: Real>(config: &SqueezingConfig<T>, rows: &DMatrix<Complex<T>>) -> Result<CovarianceMatrix<T>> {
    let (k, n) = rows.shape();
    if n != config.len() || k == 0 || k > n {
        return input(format!("need a k x n block with 1 <= k <= n = {}, got {k} x {n}", config.len()));
    }
    // Rows of P̂ η(U) √σ₀: x_i -> [Re U_i, Im U_i], p_i -> [-Im U_i, Re U_i].
    let mut half = DMatrix::zeros(2 * k, 2 * n);
    for (j, &s) in config.values().iter().enumerate() {
        let up = s.exp();
        let down = (-s).exp();
        for i in 0..k {
            let z = rows[(i, j)];
            half[(i, j)] = z.re * up;
            half[(i, n + j)] = z.im * down;
            half[(k + i, j)] = -z.im * up;
            half[(k + i, n + j)] = z.re * down;
        }
    }
    let mut out = DMatrix::zeros(2 * k, 2 * k);
    out.gemm(T::one(), &half, &half.transpose(), T::zero());
    Ok(CovarianceMatrix::from_trusted(symmetrize(out)))
}

/// Reduced state of the first `k` modes: rows and columns
/// `{0..k} ∪ {m..m+k}`.
pub fn reduce_subsystem<T: Real>(sigma: &CovarianceMatrix<T>, k: usize) -> Result<CovarianceMatrix<T>> {
    let m = sigma.dim_modes();
    if k == 0 || k > m {
        return input(format!("subsystem size {k} outside 1..={m}"));
    }
    let modes: Vec<usize> = (0..k).collect();
    reduce_modes(sigma, &modes)
}

/// Reduced state of an arbitrary ordered set of distinct modes.
pub fn reduce_modes<T: Real>(sigma: &CovarianceMatrix<T>, modes: &[usize]) -> Result<CovarianceMatrix<T>> {
    let m = sigma.dim_modes();
    if modes.is_empty() {
        return input("empty mode selection");
    }
    let mut seen = vec![false; m];
    for &i in modes {
        if i >= m || seen[i] {
            return input(format!("mode {i} out of range or repeated"));
        }
        seen[i] = true;
    }
    let idx: Vec<usize> = modes.iter().copied().chain(modes.iter().map(|&i| m + i)).collect();
    let e = sigma.entries();
    let out = DMatrix::from_fn(idx.len(), idx.len(), |a, b| e[(idx[a], idx[b])]);
    Ok(CovarianceMatrix::from_trusted(out))
}

/// Symplectic eigenvalues: the positive eigenvalues of `iΩσ`.
///
/// `-K²` with `K = Ωσ` is similar to the symmetric `Gᵀ G` where
/// `G = Lᵀ Ω L` and `σ = L Lᵀ`, so a real symmetric eigensolver suffices.
/// Its eigenvalues are the `ν²`, each twice.
pub fn symplectic_eigenvalues<T: Real>(sigma: &CovarianceMatrix<T>) -> Result<SymplecticSpectrum<T>> {
    let m = sigma.dim_modes();
    let chol = match sigma.entries().clone().cholesky() {
        Some(c) => c,
        None => return numerical("covariance matrix is not positive definite"),
    };
    let l = chol.l();
    // Ω L: top half takes the p rows, bottom half the negated x rows.
    let mut omega_l = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        omega_l.set_row(i, &l.row(m + i));
        omega_l.set_row(m + i, &(-l.row(i)));
    }
    let g = l.transpose() * omega_l;
    let gram = symmetrize(g.transpose() * &g);
    let mut eig: Vec<T> = gram.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut values = Vec::with_capacity(m);
    for pair in eig.chunks(2) {
        let (a, b) = (pair[0], pair[1]);
        let scale = a.abs().max(b.abs()).max(T::lit(f64::MIN_POSITIVE));
        if !((b - a).abs() <= T::pairing_tol() * scale) {
            return numerical(format!(
                "symplectic eigenvalues do not pair: {:e} vs {:e}",
                a.to_f64(),
                b.to_f64()
            ));
        }
        let mut nu = ((a + b) * T::lit(0.5)).max(T::zero()).sqrt();
        if nu < T::one() {
            if nu >= T::one() - T::purity_tol() {
                nu = T::one();
            } else {
                return numerical(format!(
                    "symplectic eigenvalue {:e} violates the uncertainty bound",
                    nu.to_f64()
                ));
            }
        }
        values.push(nu);
    }
    values.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(SymplecticSpectrum { values })
}

fn clamp_entropy<T: Real>(s: T) -> Result<T> {
    if s >= T::zero() {
        Ok(s)
    } else if s >= -T::entropy_floor() {
        Ok(T::zero())
    } else {
        numerical(format!("negative entropy {:e}: state violates the uncertainty bound", s.to_f64()))
    }
}

/// `½ log det σ` from a Cholesky factorization.
pub fn renyi2_entropy<T: Real>(sigma: &CovarianceMatrix<T>) -> Result<T> {
    let chol = match sigma.entries().clone().cholesky() {
        Some(c) => c,
        None => return numerical("covariance matrix is not positive definite"),
    };
    let l = chol.l_dirty();
    let s = (0..l.nrows()).fold(T::zero(), |acc, i| acc + l[(i, i)].ln());
    clamp_entropy(s)
}

/// Rényi-2 entropy of the first `k` modes for every `k = 0..=m`, from a
/// single Cholesky factorization of the mode-interleaved matrix.
pub fn renyi2_profile<T: Real>(sigma: &CovarianceMatrix<T>) -> Result<Vec<T>> {
    let m = sigma.dim_modes();
    let e = sigma.entries();
    // Interleaved index 2i -> x_i, 2i+1 -> p_i.
    let src = |a: usize| if a % 2 == 0 { a / 2 } else { m + a / 2 };
    let inter = DMatrix::from_fn(2 * m, 2 * m, |a, b| e[(src(a), src(b))]);
    let chol = match inter.cholesky() {
        Some(c) => c,
        None => return numerical("covariance matrix is not positive definite"),
    };
    let l = chol.l_dirty();
    let mut out = Vec::with_capacity(m + 1);
    out.push(T::zero());
    let mut acc = T::zero();
    for i in 0..m {
        acc += l[(2 * i, 2 * i)].ln() + l[(2 * i + 1, 2 * i + 1)].ln();
        out.push(clamp_entropy(acc)?);
    }
    Ok(out)
}

/// `h₁(x) = ((x+1)/2) log((x+1)/2) - ((x-1)/2) log((x-1)/2)`, with `h₁(1) = 0`.
pub fn h1<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    let plus = (x + T::one()) * half;
    let minus = (x - T::one()) * half;
    let tail = if minus > T::zero() { minus * minus.ln() } else { T::zero() };
    plus * plus.ln() - tail
}

/// `h₂(x) = log x`.
pub fn h2<T: Real>(x: T) -> T {
    x.ln()
}

/// `log cosh x`, accurate for tiny and huge arguments.
pub fn log_cosh<T: Real>(x: T) -> T {
    let a = x.abs();
    if a < T::one() {
        let t = a.tanh();
        -(-(t * t)).ln_1p() * T::lit(0.5)
    } else {
        a + (-(a + a)).exp().ln_1p() - T::lit(std::f64::consts::LN_2)
    }
}

pub fn von_neumann_entropy<T: Real>(spectrum: &SymplecticSpectrum<T>) -> T {
    spectrum.values().iter().fold(T::zero(), |acc, &nu| acc + h1(nu))
}

/// `n·min(k/n, 1-k/n)·h_j(cosh 2s)`, the largest entropy any passive network
/// can create on `k` of `n` equally squeezed modes.
pub fn max_subsystem_entropy<T: Real>(n: usize, k: usize, s: T, order: EntropyOrder) -> Result<T> {
    if k > n {
        return input(format!("subsystem size {k} exceeds {n} modes"));
    }
    let m = T::lit(k.min(n - k) as f64);
    let h = match order {
        EntropyOrder::Renyi2 => log_cosh(s + s),
        EntropyOrder::VonNeumann => h1((s + s).cosh()),
    };
    Ok(m * h)
}

/// Unitary whose first `k` rows are `(e_{2i} + i e_{2i+1})/√2`, completed to
/// a full unitary by Gram–Schmidt against the standard basis. It makes
/// `W = 0`, which saturates the entropy bound for any equal squeezing.
pub fn build_max_entangling_unitary<T: Real>(n: usize, k: usize) -> Result<PassiveUnitary<T>> {
    if n == 0 || 2 * k > n {
        return input(format!("need 2k <= n, got n = {n}, k = {k}"));
    }
    let zero = Complex::new(T::zero(), T::zero());
    let amp = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    let mut rows: Vec<DVector<Complex<T>>> = Vec::with_capacity(n);
    for i in 0..k {
        let mut v = DVector::from_element(n, zero);
        v[2 * i] = Complex::new(amp, T::zero());
        v[2 * i + 1] = Complex::new(T::zero(), amp);
        rows.push(v);
    }
    for basis in 0..n {
        if rows.len() == n {
            break;
        }
        let mut v = DVector::from_element(n, zero);
        v[basis] = Complex::new(T::one(), T::zero());
        for _pass in 0..2 {
            for r in &rows {
                let overlap = r.dotc(&v);
                v -= r * overlap;
            }
        }
        let norm = v.norm();
        if norm > T::lit(0.5) {
            rows.push(v.unscale(norm));
        }
    }
    if rows.len() != n {
        return numerical("orthonormal completion failed");
    }
    let entries = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    PassiveUnitary::new(entries)
}

/// `S_kk = (U Uᵀ)` restricted to the first `k` rows and columns.
fn symmetric_block<T: Real>(u: &PassiveUnitary<T>, k: usize) -> DMatrix<Complex<T>> {
    let top = u.entries().rows(0, k);
    &top * top.transpose()
}

/// `[Tr W, …, Tr W^max_power]` for `W = Π U Uᵀ Π Ū Ū^T Π` on the first `k` modes.
pub fn trace_w_powers<T: Real>(u: &PassiveUnitary<T>, k: usize, max_power: usize) -> Result<Vec<T>> {
    let n = u.dim();
    if k == 0 || k > n {
        return input(format!("subsystem size {k} outside 1..={n}"));
    }
    if max_power == 0 {
        return input("max_power must be at least 1");
    }
    let s = symmetric_block(u, k);
    let w = &s * s.map(|z| z.conj());
    let mut power = w.clone();
    let mut out = Vec::with_capacity(max_power);
    for p in 1..=max_power {
        out.push(power.trace().re);
        if p < max_power {
            power = &power * &w;
        }
    }
    Ok(out)
}

/// The real `2k × 2k` matrix with `σ(U) = cosh(2s) I + sinh(2s) M` for
/// equal squeezing `s`: blocks `Re X, Im X; Im X, -Re X` of `X = Ū U†`
/// restricted to the first `k` modes.
pub fn m_matrix<T: Real>(u: &PassiveUnitary<T>, k: usize) -> Result<DMatrix<T>> {
    let n = u.dim();
    if k == 0 || k > n {
        return input(format!("subsystem size {k} outside 1..={n}"));
    }
    let x = symmetric_block(u, k).map(|z| z.conj());
    let mut m = DMatrix::zeros(2 * k, 2 * k);
    for i in 0..k {
        for j in 0..k {
            let z = x[(i, j)];
            m[(i, j)] = z.re;
            m[(i, k + j)] = z.im;
            m[(k + i, j)] = z.im;
            m[(k + i, k + j)] = -z.re;
        }
    }
    Ok(m)
}
