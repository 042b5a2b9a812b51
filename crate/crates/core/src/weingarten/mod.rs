//! Exact and asymptotic Weingarten calculus on `U(n)`, exact moments of
//! `Tr W^ℓ`, and the permutation enumerations behind the Page-curve
//! coefficients.

mod permutation;

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use permutation::{partitions, Permutation};
use permutation::{cycle_type_of, next_permutation, UnionFind};

use crate::analytic::catalan_number;
use crate::error::{input, Error, Result};

/// Arbitrary-precision rational in lowest terms.
pub type ExactRational = BigRational;

/// Environment variable that raises both capacity limits to the given `q`.
pub const MAX_Q_ENV: &str = "PAGECURVE_MAX_Q";

/// Largest problem sizes the engine accepts. Cost grows like `(q!)²` for
/// moments and `(2ℓ)!` for enumerations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapacityLimits {
    /// Total number of `U` factors in a moment (`q = 2 Σ powers`).
    pub moment_max_q: usize,
    /// Size `2ℓ` of the symmetric group walked by the enumerations.
    pub enumeration_max_q: usize,
}

impl Default for CapacityLimits {
    fn default() -> Self {
        Self { moment_max_q: 6, enumeration_max_q: 10 }
    }
}

impl CapacityLimits {
    pub fn with_max_q(max_q: usize) -> Self {
        Self { moment_max_q: max_q, enumeration_max_q: max_q }
    }

    /// Defaults, overridden by `PAGECURVE_MAX_Q` when it is set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(MAX_Q_ENV) {
            Ok(v) => match v.trim().parse::<usize>() {
                Ok(q) => Ok(Self::with_max_q(q)),
                Err(_) => input(format!("{MAX_Q_ENV} must be a non-negative integer, got {v:?}")),
            },
            Err(_) => Ok(Self::default()),
        }
    }
}

fn check_capacity(q: usize, limit: usize) -> Result<()> {
    if q > limit {
        return Err(Error::Capacity { requested: q, limit });
    }
    Ok(())
}

/// Solves `A x = b` exactly by Gauss–Jordan elimination over a field.
/// Returns `None` when `A` is singular.
pub fn solve_exact<C: Clone + Num>(mut a: Vec<Vec<C>>, mut b: Vec<C>) -> Option<Vec<C>> {
    let n = b.len();
    assert!(a.len() == n && a.iter().all(|row| row.len() == n), "system must be square");
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = C::one() / a[col][col].clone();
        for j in col..n {
            a[col][j] = a[col][j].clone() * inv.clone();
        }
        b[col] = b[col].clone() * inv;
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for j in col..n {
                let v = a[col][j].clone() * factor.clone();
                a[r][j] = a[r][j].clone() - v;
            }
            let v = b[col].clone() * factor;
            b[r] = b[r].clone() - v;
        }
    }
    Some(b)
}

fn pow_int(base: usize, exp: usize) -> BigInt {
    num_traits::pow(BigInt::from(base), exp)
}

fn check_wg_domain(q: usize, n: usize) -> Result<()> {
    if q == 0 {
        return input("Weingarten function needs q >= 1");
    }
    if n < q {
        return Err(Error::Domain(format!(
            "Weingarten Gram matrix is singular for n = {n} < q = {q}"
        )));
    }
    Ok(())
}

/// `Wg(·, n)` on `S_q` for every cycle type, by exact inversion of the full
/// `q! × q!` Gram matrix `G[σ][τ] = n^{#(στ⁻¹)}`.
pub fn wg_by_gram(q: usize, n: usize) -> Result<BTreeMap<Vec<usize>, ExactRational>> {
    check_wg_domain(q, n)?;
    let perms = Permutation::all(q);
    let gram: Vec<Vec<BigRational>> = perms
        .iter()
        .map(|s| {
            perms
                .iter()
                .map(|t| BigRational::from_integer(pow_int(n, s.compose(&t.inverse()).cycle_count())))
                .collect()
        })
        .collect();
    let mut rhs = vec![BigRational::zero(); perms.len()];
    rhs[0] = BigRational::one(); // lexicographic order starts at the identity
    let col = solve_exact(gram, rhs).ok_or_else(|| Error::Domain(format!("singular Gram matrix at n = {n}")))?;
    let mut out = BTreeMap::new();
    for (p, w) in perms.iter().zip(col) {
        out.entry(p.cycle_type()).or_insert(w);
    }
    Ok(out)
}

/// Same values as [`wg_by_gram`], from the conjugacy-class-reduced system
/// `Σ_λ A[μ][λ] Wg(λ) = δ_{μ,1}` with `A[μ][λ] = Σ_{τ: type(π_μ τ⁻¹) = λ} n^{#τ}`.
pub fn wg_by_classes(q: usize, n: usize) -> Result<BTreeMap<Vec<usize>, ExactRational>> {
    check_wg_domain(q, n)?;
    let classes = partitions(q);
    let index: HashMap<Vec<usize>, usize> = classes.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
    let perms = Permutation::all(q);
    let inverses: Vec<(Permutation, usize)> = perms.iter().map(|t| (t.inverse(), t.cycle_count())).collect();
    let mut a = vec![vec![BigRational::zero(); classes.len()]; classes.len()];
    for (mu, class) in classes.iter().enumerate() {
        let rep = Permutation::with_cycle_type(class);
        let mut counts: HashMap<(usize, usize), u64> = HashMap::new();
        for (t_inv, cycles) in &inverses {
            let lam = index[&cycle_type_of(rep.compose(t_inv).images())];
            *counts.entry((lam, *cycles)).or_default() += 1;
        }
        for ((lam, cycles), count) in counts {
            a[mu][lam] += BigRational::from_integer(BigInt::from(count) * pow_int(n, cycles));
        }
    }
    let identity = index[&vec![1; q]];
    let mut rhs = vec![BigRational::zero(); classes.len()];
    rhs[identity] = BigRational::one();
    let w = solve_exact(a, rhs).ok_or_else(|| Error::Domain(format!("singular class system at n = {n}")))?;
    Ok(classes.into_iter().zip(w).collect())
}

/// Weingarten values for every cycle type of `S_q`: the full Gram route for
/// `q ≤ 4`, the class-reduced route above that.
pub fn wg_table(q: usize, n: usize, limits: &CapacityLimits) -> Result<BTreeMap<Vec<usize>, ExactRational>> {
    check_capacity(q, limits.moment_max_q)?;
    if q <= 4 {
        wg_by_gram(q, n)
    } else {
        wg_by_classes(q, n)
    }
}

/// Exact `Wg(p, n)`.
pub fn wg_exact(p: &Permutation, n: usize, limits: &CapacityLimits) -> Result<ExactRational> {
    let table = wg_table(p.size(), n, limits)?;
    Ok(table[&p.cycle_type()].clone())
}

/// Leading large-`n` term `n^{-q-|p|} Π_c (-1)^{|c|-1} C_{|c|-1}`.
pub fn wg_asymptotic(p: &Permutation, n: usize) -> f64 {
    let mut coeff = 1.0;
    for len in p.cycle_type() {
        let c = catalan_number(len as u64 - 1).to_f64().expect("small Catalan number");
        coeff *= if len % 2 == 1 { c } else { -c };
    }
    let exponent = (p.size() + p.transposition_distance()) as i32;
    coeff * (n as f64).powi(-exponent)
}

/// `E[U_{i₁j₁} ⋯ U_{i_q j_q} Ū_{i'₁j'₁} ⋯ Ū_{i'_q j'_q}]` over Haar `U(n)`,
/// exactly. Indices are 0-based.
pub fn unitary_moment(
    rows: &[usize],
    cols: &[usize],
    conj_rows: &[usize],
    conj_cols: &[usize],
    n: usize,
    limits: &CapacityLimits,
) -> Result<ExactRational> {
    let q = rows.len();
    if cols.len() != q || conj_rows.len() != q || conj_cols.len() != q {
        return input("moment index lists must all have the same length");
    }
    if rows.iter().chain(cols).chain(conj_rows).chain(conj_cols).any(|&i| i >= n) {
        return input(format!("moment indices must be below n = {n}"));
    }
    let table = wg_table(q, n, limits)?;
    let perms = Permutation::all(q);
    let matches = |from: &[usize], to: &[usize], p: &Permutation| (0..q).all(|a| from[a] == to[p.image(a)]);
    let sigmas: Vec<&Permutation> = perms.iter().filter(|s| matches(rows, conj_rows, s)).collect();
    let taus: Vec<&Permutation> = perms.iter().filter(|t| matches(cols, conj_cols, t)).collect();
    let mut total = BigRational::zero();
    for s in &sigmas {
        for t in &taus {
            total += &table[&s.compose(&t.inverse()).cycle_type()];
        }
    }
    Ok(total)
}

/// Index-identification pattern of `Π_m Tr W^{ℓ_m}`: for every block of
/// `2ℓ` consecutive factors, `i'_a = i_{a+1}` cyclically within the block,
/// `j_{2b} = j_{2b+1}` and `j'_{2b} = j'_{2b+1}` (0-based).
struct TracePattern {
    q: usize,
    row_base: UnionFind,
    col_base: UnionFind,
}

impl TracePattern {
    fn new(powers: &[usize]) -> Self {
        let q = 2 * powers.iter().sum::<usize>();
        // Nodes 0..q are unconjugated indices, q..2q the conjugated ones.
        let mut row_base = UnionFind::new(2 * q);
        let mut col_base = UnionFind::new(2 * q);
        let mut offset = 0;
        for &l in powers {
            let len = 2 * l;
            for a in 0..len {
                row_base.union(q + offset + a, offset + (a + 1) % len);
            }
            for b in 0..l {
                col_base.union(offset + 2 * b, offset + 2 * b + 1);
                col_base.union(q + offset + 2 * b, q + offset + 2 * b + 1);
            }
            offset += len;
        }
        Self { q, row_base, col_base }
    }

    fn components(&self, base: &UnionFind, p: &Permutation) -> usize {
        let mut uf = base.clone();
        for a in 0..self.q {
            uf.union(a, self.q + p.image(a));
        }
        uf.components()
    }
}

/// Exact `E_U[Π_m Tr W^{ℓ_m}]` at finite `n` with `W` on the first `k` modes.
pub fn haar_moment_trace_product(powers: &[usize], n: usize, k: usize, limits: &CapacityLimits) -> Result<ExactRational> {
    if powers.is_empty() || powers.contains(&0) {
        return input("powers must be a non-empty list of positive integers");
    }
    if k > n {
        return input(format!("subsystem size {k} exceeds {n} modes"));
    }
    let q = 2 * powers.iter().sum::<usize>();
    check_capacity(q, limits.moment_max_q)?;
    let table = wg_table(q, n, limits)?;
    let classes: Vec<Vec<usize>> = table.keys().cloned().collect();
    let class_index: HashMap<&Vec<usize>, usize> = classes.iter().enumerate().map(|(i, c)| (c, i)).collect();

    let pattern = TracePattern::new(powers);
    let perms = Permutation::all(q);
    let row_exp: Vec<usize> = perms.iter().map(|s| pattern.components(&pattern.row_base, s)).collect();
    let col_exp: Vec<usize> = perms.iter().map(|t| pattern.components(&pattern.col_base, t)).collect();
    let inverses: Vec<Permutation> = perms.iter().map(Permutation::inverse).collect();

    let mut counts: HashMap<(usize, usize, usize), u64> = HashMap::new();
    for (s, &a) in perms.iter().zip(&row_exp) {
        for (t_inv, &b) in inverses.iter().zip(&col_exp) {
            let class = class_index[&cycle_type_of(s.compose(t_inv).images())];
            *counts.entry((a, b, class)).or_default() += 1;
        }
    }
    let mut total = BigRational::zero();
    for ((a, b, class), count) in counts {
        let weight = BigInt::from(count) * pow_int(k, a) * pow_int(n, b);
        total += BigRational::from_integer(weight) * &table[&classes[class]];
    }
    Ok(total)
}

/// Polynomial extrapolation of `(h, y)` samples to `h = 0` (Neville).
pub fn extrapolate_to_zero(points: &[(f64, f64)]) -> f64 {
    assert!(!points.is_empty(), "nothing to extrapolate");
    let h: Vec<f64> = points.iter().map(|p| p.0).collect();
    let mut y: Vec<f64> = points.iter().map(|p| p.1).collect();
    let m = y.len();
    for level in 1..m {
        for i in 0..m - level {
            let (hi, hj) = (h[i], h[i + level]);
            y[i] = (hj * y[i] - hi * y[i + 1]) / (hj - hi);
        }
    }
    y[0]
}

/// `ω^(2)` from exact finite-`n` moments: at each ladder point form
/// `Var(Tr W) / (4 (r(1-r))²)` and extrapolate in `1/n`.
pub fn omega2_extrapolation(n_ladder: &[usize], r: &ExactRational, limits: &CapacityLimits) -> Result<f64> {
    if n_ladder.len() < 2 {
        return input("need at least two ladder points to extrapolate");
    }
    if !(r.is_positive() && r < &BigRational::one()) {
        return input(format!("subsystem fraction must lie strictly between 0 and 1, got {r}"));
    }
    let spread = r * (BigRational::one() - r);
    let mut points = Vec::with_capacity(n_ladder.len());
    for &n in n_ladder {
        if n < 4 {
            return input(format!("ladder points must be at least 4, got {n}"));
        }
        let k = r * BigRational::from_integer(BigInt::from(n));
        if !k.is_integer() {
            return input(format!("r * n = {k} is not an integer at n = {n}"));
        }
        let k = k.to_integer().to_usize().expect("k fits in usize");
        let first = haar_moment_trace_product(&[1], n, k, limits)?;
        let second = haar_moment_trace_product(&[1, 1], n, k, limits)?;
        let var = second - &first * &first;
        let scaled = var / (BigRational::from_integer(4.into()) * &spread * &spread);
        points.push((1.0 / n as f64, scaled.to_f64().expect("finite")));
    }
    Ok(extrapolate_to_zero(&points))
}

/// `ξ(p)` for `p ∈ S_{2ℓ}`: components of the graph on `ℓ` vertices with an
/// edge `{⌈p(2a)/2⌉, ⌈p(2a+1)/2⌉}` for each `a`, indices taken cyclically.
pub fn xi_statistic(p: &Permutation) -> Result<usize> {
    if p.size() == 0 || p.size() % 2 == 1 {
        return input(format!("xi needs an even, positive degree, got S_{}", p.size()));
    }
    Ok(xi_of(p.images()))
}

fn xi_of(images: &[usize]) -> usize {
    let q = images.len();
    let mut uf = UnionFind::new(q / 2);
    // 1-based pairs (2a, 2a+1) and (2ℓ, 1) are 0-based (2a-1, 2a mod 2ℓ).
    for a in (1..q).step_by(2) {
        uf.union(images[a] / 2, images[(a + 1) % q] / 2);
    }
    uf.components()
}

#[derive(Debug, Default, Clone, Copy)]
struct XiSums {
    /// `ξ = |τ|`
    constant: i128,
    /// `ξ = |τ| + 1`
    top: i128,
}

impl std::ops::Add for XiSums {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { constant: self.constant + o.constant, top: self.top + o.top }
    }
}

/// Walks `S_{2ℓ}` once, split into independent ranges by first image.
fn xi_sums(l: usize) -> XiSums {
    let q = 2 * l;
    let catalan: Vec<i128> = (0..q as u64).map(|m| catalan_number(m).to_i128().expect("small Catalan number")).collect();
    (0..q)
        .into_par_iter()
        .map(|first| {
            let mut images: Vec<usize> = std::iter::once(first).chain((0..q).filter(|&x| x != first)).collect();
            let mut sums = XiSums::default();
            let mut seen = vec![false; q];
            loop {
                seen.iter_mut().for_each(|s| *s = false);
                let mut cycles = 0;
                let mut weight: i128 = 1;
                for start in 0..q {
                    if seen[start] {
                        continue;
                    }
                    let mut len = 0;
                    let mut x = start;
                    while !seen[x] {
                        seen[x] = true;
                        x = images[x];
                        len += 1;
                    }
                    cycles += 1;
                    weight *= catalan[len - 1];
                }
                if cycles % 2 == 1 {
                    weight = -weight;
                }
                let distance = q - cycles;
                let xi = xi_of(&images);
                if xi == distance {
                    sums.constant += weight;
                } else if xi == distance + 1 {
                    sums.top += weight;
                }
                if !next_permutation(&mut images[1..]) {
                    break;
                }
            }
            sums
        })
        .reduce(XiSums::default, |a, b| a + b)
}

/// `a^(ℓ) = Σ_{τ ∈ S_{2ℓ}, ξ(τ) = |τ|} (-1)^{#τ} Π_c C_{|c|-1}`, the constant
/// term of `E Tr W^ℓ`.
pub fn a_ell_enumeration(l: usize, limits: &CapacityLimits) -> Result<ExactRational> {
    if !(1..=6).contains(&l) {
        return input(format!("a_ell enumeration supports 1 <= l <= 6, got {l}"));
    }
    check_capacity(2 * l, limits.enumeration_max_q)?;
    Ok(BigRational::from_integer(BigInt::from(xi_sums(l).constant)))
}

/// The same sum restricted to `ξ(τ) = |τ| + 1`; it reproduces the leading
/// coefficient `α_{2ℓ}^(ℓ)` of `f_ℓ`.
pub fn alpha_top_enumeration(l: usize, limits: &CapacityLimits) -> Result<ExactRational> {
    if !(1..=5).contains(&l) {
        return input(format!("alpha_top enumeration supports 1 <= l <= 5, got {l}"));
    }
    check_capacity(2 * l, limits.enumeration_max_q)?;
    Ok(BigRational::from_integer(BigInt::from(xi_sums(l).top)))
}
