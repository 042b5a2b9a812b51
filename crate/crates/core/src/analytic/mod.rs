//! Closed forms and series for the large-`n` Page curve of equally squeezed
//! modes, its constant correction and its variance.

mod polynomial;

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub use polynomial::Polynomial;

use crate::error::{input, Error, Result};
use crate::gaussian::{log_cosh, SqueezingConfig};

/// Exact polynomial with rational coefficients.
pub type RationalPolynomial = Polynomial<BigRational>;

/// Truncation control for the infinite series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesTolerance {
    pub abs_tol: f64,
    pub max_terms: usize,
}

impl SeriesTolerance {
    pub fn new(abs_tol: f64, max_terms: usize) -> Result<Self> {
        if !(abs_tol > 0.0) || !abs_tol.is_finite() {
            return input(format!("abs_tol must be positive, got {abs_tol}"));
        }
        if max_terms == 0 {
            return input("max_terms must be at least 1");
        }
        Ok(Self { abs_tol, max_terms })
    }
}

impl Default for SeriesTolerance {
    fn default() -> Self {
        Self { abs_tol: 1e-10, max_terms: 10_000 }
    }
}

/// A truncated series with a rigorous bound on what was dropped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: f64,
    pub terms: usize,
    pub tail_bound: f64,
}

/// Rational coefficients `ω^(d)` of the variance expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarianceCoefficients {
    omega: BTreeMap<usize, BigRational>,
}

impl Default for VarianceCoefficients {
    fn default() -> Self {
        let mut omega = BTreeMap::new();
        omega.insert(2, BigRational::new(1.into(), 2.into()));
        Self { omega }
    }
}

impl VarianceCoefficients {
    /// Adds or replaces `ω^(d)`. Only the `d = 2` value is known in closed form.
    pub fn with(mut self, d: usize, value: BigRational) -> Result<Self> {
        if d < 2 {
            return input(format!("variance coefficients start at d = 2, got {d}"));
        }
        self.omega.insert(d, value);
        Ok(self)
    }

    pub fn get(&self, d: usize) -> Option<&BigRational> {
        self.omega.get(&d)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &BigRational)> {
        self.omega.iter().map(|(&d, w)| (d, w))
    }
}

pub(crate) fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

fn rational(num: BigInt, den: BigInt) -> BigRational {
    BigRational::new(num, den)
}

/// `C_m = (2m)! / (m! (m+1)!)`.
pub fn catalan_number(m: u64) -> BigUint {
    let c = binomial(2 * m, m) / BigInt::from(m + 1);
    c.to_biguint().expect("Catalan numbers are positive")
}

/// Coefficient of `r^d` in `f_ℓ`:
/// `2(-1)^{d-ℓ-1} C(2ℓ-1, ℓ-1) C(ℓ, d-ℓ-1) (2ℓ-d+1) / ((d-1) d)`.
pub fn alpha_coefficient(l: u64, d: u64) -> Result<BigRational> {
    if l == 0 || d < l + 1 || d > 2 * l {
        return input(format!("alpha coefficient needs l >= 1 and l+1 <= d <= 2l, got l = {l}, d = {d}"));
    }
    let sign = if (d - l - 1) % 2 == 0 { 1 } else { -1 };
    let num = BigInt::from(2 * sign) * binomial(2 * l - 1, l - 1) * binomial(l, d - l - 1) * BigInt::from(2 * l - d + 1);
    Ok(rational(num, BigInt::from((d - 1) * d)))
}

/// Terminating `₂F₁(-m, b; c; x)` as an exact polynomial in `x`:
/// `Σ_a (-1)^a C(m, a) (c-1)! (a+b-1)! / ((b-1)! (a+c-1)!) x^a`.
pub fn terminating_hypergeometric(m: u64, b: u64, c: u64) -> RationalPolynomial {
    assert!(b >= 1 && c >= 1, "hypergeometric parameters must be positive integers");
    let fc = factorial(c - 1);
    let fb = factorial(b - 1);
    Polynomial::from_terms((0..=m).map(|a| {
        let sign = if a % 2 == 0 { 1 } else { -1 };
        let num = BigInt::from(sign) * binomial(m, a) * &fc * factorial(a + b - 1);
        let den = &fb * factorial(a + c - 1);
        (a as usize, rational(num, den))
    }))
}

/// `f_ℓ(r) = r^{ℓ+1} C_ℓ ₂F₁(1-ℓ, ℓ; ℓ+2; r)`, the limit of `E Tr W^ℓ / n`.
pub fn f_polynomial(l: u64) -> RationalPolynomial {
    assert!(l >= 1, "f_l is defined for l >= 1");
    let hyper = terminating_hypergeometric(l - 1, l, l + 2);
    let catalan = BigRational::from_integer(BigInt::from(catalan_number(l)));
    let prefactor = Polynomial::monomial(l as usize + 1, catalan);
    &prefactor * &hyper
}

/// `G_ℓ(r) = r - f_ℓ(r)` as an exact polynomial.
pub fn g_polynomial(l: u64) -> RationalPolynomial {
    Polynomial::monomial(1, BigRational::one()) - f_polynomial(l)
}

/// `G_ℓ(r)` by exact rational Horner evaluation at the (exactly
/// representable) double `r`, rounded once at the end.
pub fn g_function(l: u64, r: f64) -> Result<f64> {
    check_fraction(r)?;
    let x = BigRational::from_float(r).expect("finite");
    Ok(g_polynomial(l).eval(&x).to_f64().expect("finite rational"))
}

fn check_fraction(r: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&r) {
        return input(format!("subsystem fraction must lie in [0, 1], got {r}"));
    }
    Ok(())
}

fn ln_catalan(l: u64) -> f64 {
    (2..=l).map(|i| (2.0 * (2 * i - 1) as f64 / (i + 1) as f64).ln()).sum()
}

/// `f_ℓ(r)` in floating point, usable for large `ℓ`.
///
/// Uses the Pfaff transform `₂F₁(a, b; c; x) = (1-x)^{-a} ₂F₁(a, c-b; c; x/(x-1))`,
/// whose terminating sum has only positive terms for `r ≤ 1/2`, summed in
/// log space. Larger `r` goes through `f_ℓ(r) = f_ℓ(1-r) + 2r - 1`.
pub fn f_value(l: u64, r: f64) -> Result<f64> {
    check_fraction(r)?;
    if l == 0 {
        return input("f_l is defined for l >= 1");
    }
    if r > 0.5 {
        return Ok(f_value_low(l, 1.0 - r, ln_catalan(l)) + 2.0 * r - 1.0);
    }
    Ok(f_value_low(l, r, ln_catalan(l)))
}

/// `G_ℓ(r)` in floating point, via the symmetric form `m - f_ℓ(m)`,
/// `m = min(r, 1-r)`.
pub fn g_value(l: u64, r: f64) -> Result<f64> {
    check_fraction(r)?;
    if l == 0 {
        return input("G_l is defined for l >= 1");
    }
    let m = r.min(1.0 - r);
    Ok(m - f_value_low(l, m, ln_catalan(l)))
}

fn f_value_low(l: u64, r: f64, ln_cat: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let ratio = r / (1.0 - r);
    let mut logs = Vec::with_capacity(l as usize);
    let mut log_term = ln_cat + (l + 1) as f64 * r.ln() + (l - 1) as f64 * (1.0 - r).ln();
    logs.push(log_term);
    for j in 0..l - 1 {
        let factor = ((l - 1 - j) * (j + 2)) as f64 / ((l + 2 + j) * (j + 1)) as f64 * ratio;
        log_term += factor.ln();
        logs.push(log_term);
    }
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    top.exp() * logs.iter().map(|&x| (x - top).exp()).sum::<f64>()
}

/// `α(s, r) = Σ_ℓ tanh^{2ℓ}(2s)/(2ℓ) G_ℓ(r)`, the limiting Rényi-2 entropy
/// per mode.
///
/// Summed in the regrouped form `m log cosh 2s - Σ_ℓ t^{2ℓ} f_ℓ(m)/(2ℓ)` with
/// `m = min(r, 1-r)` and `t = tanh 2s`, so the part that does not decay
/// with `ℓ` is exact. Since `0 ≤ f_ℓ(m) ≤ m (4m(1-m))^ℓ`, the tail past `L`
/// is at most `m q^{L+1} / ((2L+2)(1-q))` with `q = t² 4m(1-m)`.
pub fn page_curve_density(s: f64, r: f64, tol: SeriesTolerance) -> Result<SeriesValue> {
    check_fraction(r)?;
    if !s.is_finite() {
        return input(format!("squeezing must be finite, got {s}"));
    }
    let m = r.min(1.0 - r);
    if s == 0.0 || m == 0.0 {
        return Ok(SeriesValue { value: 0.0, terms: 0, tail_bound: 0.0 });
    }
    let t2 = (2.0 * s).tanh().powi(2);
    let q = t2 * 4.0 * m * (1.0 - m);
    let tail = |terms: usize| -> f64 {
        let next = (terms + 1) as f64;
        if q >= 1.0 {
            f64::INFINITY
        } else {
            m * q.powf(next) / (2.0 * next * (1.0 - q))
        }
    };

    let mut sum = 0.0;
    let mut ln_cat = 0.0;
    let mut t_pow = 1.0;
    let mut terms = 0;
    while tail(terms) > tol.abs_tol {
        if terms == tol.max_terms {
            return Err(Error::Truncation { terms, bound: tail(terms) });
        }
        terms += 1;
        let l = terms as u64;
        if l >= 2 {
            ln_cat += (2.0 * (2 * l - 1) as f64 / (l + 1) as f64).ln();
        }
        t_pow *= t2;
        sum += t_pow * f_value_low(l, m, ln_cat) / (2 * l) as f64;
    }
    Ok(SeriesValue {
        value: m * log_cosh(2.0 * s) - sum,
        terms,
        tail_bound: tail(terms),
    })
}

/// `(α(s, 1/2), λ_max - α)` in closed form: `(log cosh s, ½ log(1 + tanh² s))`.
pub fn page_half_values(s: f64) -> (f64, f64) {
    let t = s.tanh();
    (log_cosh(s), 0.5 * (t * t).ln_1p())
}

/// `λ(s, r) = -⅛ log(1 - 4r(1-r) tanh²(2s))`, the constant finite-size
/// correction to the Page curve.
pub fn page_constant_lambda(s: f64, r: f64) -> Result<f64> {
    check_fraction(r)?;
    // 1 - 4r(1-r)t² = (1-2r)² + 4r(1-r) sech²(2s), combined in log space
    // so large s stays finite.
    let p = r * (1.0 - r);
    if p == 0.0 || s == 0.0 {
        return Ok(0.0);
    }
    let a = 2.0 * (1.0 - 2.0 * r).abs().ln();
    let b = (4.0 * p).ln() - 2.0 * log_cosh(2.0 * s);
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    let log_arg = hi + (lo - hi).exp().ln_1p();
    Ok((-log_arg / 8.0).max(0.0))
}

/// Predicted mean Rényi-2 entropy of `k` of `n` modes: `n α(s, k/n) - λ(s, k/n)`.
pub fn page_curve_prediction(n: usize, s: f64, k: usize, tol: SeriesTolerance) -> Result<f64> {
    if n == 0 || k > n {
        return input(format!("need 0 <= k <= n and n >= 1, got n = {n}, k = {k}"));
    }
    let r = k as f64 / n as f64;
    let alpha = page_curve_density(s, r, tol)?.value;
    Ok(n as f64 * alpha - page_constant_lambda(s, r)?)
}

/// `Σ_d ω^(d) tanh^{2d}(2s) (r(1-r))^d` over the supplied coefficients.
pub fn variance_series(s: f64, r: f64, coeffs: &VarianceCoefficients) -> Result<f64> {
    check_fraction(r)?;
    let x = (2.0 * s).tanh().powi(2) * r * (1.0 - r);
    Ok(coeffs
        .iter()
        .map(|(d, w)| w.to_f64().expect("finite rational") * x.powi(d as i32))
        .sum())
}

/// Small-squeezing Page curve for arbitrary squeezings: `2r(1-r) Σ s_i²`.
pub fn unequal_small_s_prediction(config: &SqueezingConfig<f64>, r: f64) -> Result<f64> {
    check_fraction(r)?;
    let total: f64 = config.values().iter().map(|s| s * s).sum();
    Ok(2.0 * r * (1.0 - r) * total)
}
