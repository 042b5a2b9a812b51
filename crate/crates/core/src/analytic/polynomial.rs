use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{FromPrimitive, Num};

/// Sparse univariate polynomial `Σ c_d x^d`. Zero coefficients are never
/// stored, so equality is structural.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial<C> {
    coeffs: BTreeMap<usize, C>,
}

impl<C: Clone + Num> Polynomial<C> {
    pub fn zero() -> Self {
        Self { coeffs: BTreeMap::new() }
    }

    pub fn from_terms<I: IntoIterator<Item = (usize, C)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (d, c) in terms {
            p.add_term(d, c);
        }
        p
    }

    /// The monomial `c x^d`.
    pub fn monomial(d: usize, c: C) -> Self {
        Self::from_terms([(d, c)])
    }

    pub fn add_term(&mut self, d: usize, c: C) {
        let sum = match self.coeffs.remove(&d) {
            Some(old) => old + c,
            None => c,
        };
        if !sum.is_zero() {
            self.coeffs.insert(d, sum);
        }
    }

    pub fn coefficient(&self, d: usize) -> C {
        self.coeffs.get(&d).cloned().unwrap_or_else(C::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &C)> {
        self.coeffs.iter().map(|(&d, c)| (d, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn min_degree(&self) -> Option<usize> {
        self.coeffs.keys().next().copied()
    }

    /// Horner evaluation in the coefficient ring.
    pub fn eval(&self, x: &C) -> C {
        let Some(top) = self.degree() else {
            return C::zero();
        };
        let mut acc = C::zero();
        for d in (0..=top).rev() {
            acc = acc * x.clone();
            if let Some(c) = self.coeffs.get(&d) {
                acc = acc + c.clone();
            }
        }
        acc
    }
}

impl<C: Clone + Num + FromPrimitive> Polynomial<C> {
    pub fn derivative(&self) -> Self {
        Self::from_terms(
            self.coeffs
                .iter()
                .filter(|(&d, _)| d > 0)
                .map(|(&d, c)| (d - 1, c.clone() * C::from_usize(d).expect("degree fits"))),
        )
    }

    pub fn nth_derivative(&self, order: usize) -> Self {
        (0..order).fold(self.clone(), |p, _| p.derivative())
    }

    /// `p(1 - x)`, expanded.
    pub fn reflect(&self) -> Self {
        let mut out = Self::zero();
        for (&d, c) in &self.coeffs {
            // (1 - x)^d = Σ_j C(d, j) (-1)^j x^j
            let mut binom = C::one();
            for j in 0..=d {
                let term = if j % 2 == 0 { binom.clone() } else { C::zero() - binom.clone() };
                out.add_term(j, c.clone() * term);
                binom = binom * C::from_usize(d - j).unwrap() / C::from_usize(j + 1).unwrap();
            }
        }
        out
    }
}

impl<C: Clone + Num> Add for Polynomial<C> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (d, c) in rhs.coeffs {
            self.add_term(d, c);
        }
        self
    }
}

impl<C: Clone + Num> Neg for Polynomial<C> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::from_terms(self.coeffs.into_iter().map(|(d, c)| (d, C::zero() - c)))
    }
}

impl<C: Clone + Num> Sub for Polynomial<C> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<C: Clone + Num> Mul for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn mul(self, rhs: Self) -> Polynomial<C> {
        let mut out = Polynomial::zero();
        for (&a, ca) in &self.coeffs {
            for (&b, cb) in &rhs.coeffs {
                out.add_term(a + b, ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<C: Clone + Num + fmt::Display> fmt::Display for Polynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (i, (d, c)) in self.coeffs.iter().rev().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            match d {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c}) r")?,
                _ => write!(f, "({c}) r^{d}")?,
            }
        }
        Ok(())
    }
}
