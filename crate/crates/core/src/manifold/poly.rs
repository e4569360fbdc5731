//! Exact polynomials in real parameters `t` and the pair `(w, w̄)`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent of a monomial `t^a w^b w̄^c`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Exponent {
    pub a: Vec<u32>,
    pub b: u32,
    pub c: u32,
}

impl Exponent {
    pub fn new(a: Vec<u32>, b: u32, c: u32) -> Self {
        Self { a, b, c }
    }

    pub fn t_degree(&self) -> u32 {
        self.a.iter().sum()
    }

    /// Degree in `(w, w̄)` only.
    pub fn w_degree(&self) -> u32 {
        self.b + self.c
    }

    pub fn total_degree(&self) -> u32 {
        self.t_degree() + self.w_degree()
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.a.as_slice() {
            [] => write!(f, "(a=0,b={},c={})", self.b, self.c),
            [a] => write!(f, "(a={a},b={},c={})", self.b, self.c),
            a => {
                let parts: Vec<String> = a.iter().map(|x| x.to_string()).collect();
                write!(f, "(a=[{}],b={},c={})", parts.join(","), self.b, self.c)
            }
        }
    }
}

/// Which Wirtinger derivative to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wirtinger {
    W,
    WBar,
}

/// A polynomial `Σ c · t^a w^b w̄^c` with complex coefficients.
///
/// Zero coefficients are never stored, so structural equality is polynomial
/// equality.
#[derive(Debug, Clone, PartialEq)]
pub struct BiPoly {
    t_arity: usize,
    terms: BTreeMap<Exponent, Complex64>,
}

impl BiPoly {
    pub fn zero(t_arity: usize) -> Self {
        Self {
            t_arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(t_arity: usize, value: Complex64) -> Self {
        let mut p = Self::zero(t_arity);
        p.add_term(vec![0; t_arity], 0, 0, value);
        p
    }

    /// The monomial `coeff · t^a w^b w̄^c`.
    pub fn monomial(a: Vec<u32>, b: u32, c: u32, coeff: Complex64) -> Self {
        let mut p = Self::zero(a.len());
        p.add_term(a, b, c, coeff);
        p
    }

    /// `w` with no t-variables.
    pub fn w() -> Self {
        Self::monomial(vec![], 1, 0, Complex64::new(1.0, 0.0))
    }

    /// `w̄` with no t-variables.
    pub fn wbar() -> Self {
        Self::monomial(vec![], 0, 1, Complex64::new(1.0, 0.0))
    }

    /// Builds a polynomial from `(a, b, c, coeff)` terms, merging duplicates.
    pub fn from_terms<I>(t_arity: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, u32, u32, Complex64)>,
    {
        let mut p = Self::zero(t_arity);
        for (a, b, c, coeff) in terms {
            if a.len() != t_arity {
                return Err(Error::ArityMismatch {
                    expected: t_arity,
                    got: a.len(),
                });
            }
            p.add_term(a, b, c, coeff);
        }
        Ok(p)
    }

    /// Adds `coeff · t^a w^b w̄^c`. Panics on an arity mismatch.
    pub fn add_term(&mut self, a: Vec<u32>, b: u32, c: u32, coeff: Complex64) {
        assert_eq!(a.len(), self.t_arity, "t-arity mismatch in add_term");
        let key = Exponent { a, b, c };
        let entry = self.terms.entry(key.clone()).or_insert(Complex64::new(0.0, 0.0));
        *entry += coeff;
        if *entry == Complex64::new(0.0, 0.0) {
            self.terms.remove(&key);
        }
    }

    pub fn t_arity(&self) -> usize {
        self.t_arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Complex64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, a: &[u32], b: u32, c: u32) -> Complex64 {
        self.terms
            .get(&Exponent::new(a.to_vec(), b, c))
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Largest `b + c` over the stored terms (0 for the zero polynomial).
    pub fn w_degree(&self) -> u32 {
        self.terms.keys().map(Exponent::w_degree).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(Exponent::total_degree)
            .max()
            .unwrap_or(0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Evaluates at real `t` and complex `w`.
    pub fn eval(&self, t: &[f64], w: Complex64) -> Result<Complex64> {
        if t.len() != self.t_arity {
            return Err(Error::ArityMismatch {
                expected: self.t_arity,
                got: t.len(),
            });
        }
        Ok(self.eval_unchecked(t, w))
    }

    /// Evaluation without the arity check; `t` must have `t_arity` entries.
    pub fn eval_unchecked(&self, t: &[f64], w: Complex64) -> Complex64 {
        let wb = w.conj();
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, coeff) in &self.terms {
            let mut tp = 1.0;
            for (ti, &ai) in t.iter().zip(&e.a) {
                tp *= ti.powi(ai as i32);
            }
            acc += coeff * tp * w.powu(e.b) * wb.powu(e.c);
        }
        acc
    }

    /// Exact Wirtinger derivative in `w` or `w̄`.
    pub fn wirtinger(&self, which: Wirtinger) -> Self {
        let mut out = Self::zero(self.t_arity);
        for (e, coeff) in &self.terms {
            match which {
                Wirtinger::W if e.b > 0 => {
                    out.add_term(e.a.clone(), e.b - 1, e.c, coeff * e.b as f64)
                }
                Wirtinger::WBar if e.c > 0 => {
                    out.add_term(e.a.clone(), e.b, e.c - 1, coeff * e.c as f64)
                }
                _ => {}
            }
        }
        out
    }

    pub fn d_w(&self) -> Self {
        self.wirtinger(Wirtinger::W)
    }

    pub fn d_wbar(&self) -> Self {
        self.wirtinger(Wirtinger::WBar)
    }

    /// Exact partial derivative in `t_index`.
    pub fn d_t(&self, t_index: usize) -> Self {
        let mut out = Self::zero(self.t_arity);
        for (e, coeff) in &self.terms {
            let k = e.a[t_index];
            if k > 0 {
                let mut a = e.a.clone();
                a[t_index] -= 1;
                out.add_term(a, e.b, e.c, coeff * k as f64);
            }
        }
        out
    }

    /// The polynomial `ζ ↦ P(t, e^{iθ} ζ)`.
    pub fn rotate(&self, theta: f64) -> Self {
        let mut out = Self::zero(self.t_arity);
        for (e, coeff) in &self.terms {
            let phase = Complex64::from_polar(1.0, theta * (e.b as f64 - e.c as f64));
            out.add_term(e.a.clone(), e.b, e.c, coeff * phase);
        }
        out
    }

    /// The pointwise conjugate `w ↦ conj(P(t, w))`.
    pub fn conj(&self) -> Self {
        let mut out = Self::zero(self.t_arity);
        for (e, coeff) in &self.terms {
            out.add_term(e.a.clone(), e.c, e.b, coeff.conj());
        }
        out
    }

    /// Substitutes the real parameters, leaving a polynomial in `(w, w̄)`.
    pub fn specialize_t(&self, t: &[f64]) -> Result<Self> {
        if t.len() != self.t_arity {
            return Err(Error::ArityMismatch {
                expected: self.t_arity,
                got: t.len(),
            });
        }
        let mut out = Self::zero(0);
        for (e, coeff) in &self.terms {
            let tp: f64 = t.iter().zip(&e.a).map(|(ti, &ai)| ti.powi(ai as i32)).product();
            out.add_term(vec![], e.b, e.c, coeff * tp);
        }
        Ok(out)
    }

    /// The recentred polynomial `ζ ↦ P(t, ζ + center)`, expanded exactly.
    pub fn recenter(&self, center: Complex64) -> Self {
        let cb = center.conj();
        let mut out = Self::zero(self.t_arity);
        for (e, coeff) in &self.terms {
            for i in 0..=e.b {
                let wi = binomial(e.b, i) * center.powu(e.b - i);
                for j in 0..=e.c {
                    let wj = binomial(e.c, j) * cb.powu(e.c - j);
                    out.add_term(e.a.clone(), i, j, coeff * wi * wj);
                }
            }
        }
        out
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut out = Self::zero(self.t_arity);
        for (e, coeff) in &self.terms {
            out.add_term(e.a.clone(), e.b, e.c, coeff * factor);
        }
        out
    }

    /// Keeps only the terms accepted by `keep`.
    pub fn filter<F>(&self, mut keep: F) -> Self
    where
        F: FnMut(&Exponent) -> bool,
    {
        Self {
            t_arity: self.t_arity,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| keep(e))
                .map(|(e, c)| (e.clone(), *c))
                .collect(),
        }
    }

    /// `Σ |c| r^(b+c)` over terms free of `t`: an upper bound for
    /// `sup_{|w| ≤ r} |P(w)|`. Terms carrying `t` are bounded with `|t| ≤ 1`.
    pub fn coefficient_bound(&self, r: f64) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c.norm() * r.powi(e.w_degree() as i32))
            .sum()
    }

    /// Largest coefficient difference against `other`.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        (self - other).max_abs_coeff()
    }

    /// Drops terms whose coefficient modulus is at most `tol`.
    pub fn prune(&self, tol: f64) -> Self {
        self.filter_coeffs(|c| c.norm() > tol)
    }

    fn filter_coeffs<F>(&self, keep: F) -> Self
    where
        F: Fn(&Complex64) -> bool,
    {
        Self {
            t_arity: self.t_arity,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| keep(c))
                .map(|(e, c)| (e.clone(), *c))
                .collect(),
        }
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl Add for &BiPoly {
    type Output = BiPoly;

    fn add(self, rhs: &BiPoly) -> BiPoly {
        assert_eq!(self.t_arity, rhs.t_arity, "t-arity mismatch in add");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.a.clone(), e.b, e.c, *c);
        }
        out
    }
}

impl Sub for &BiPoly {
    type Output = BiPoly;

    fn sub(self, rhs: &BiPoly) -> BiPoly {
        assert_eq!(self.t_arity, rhs.t_arity, "t-arity mismatch in sub");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.a.clone(), e.b, e.c, -*c);
        }
        out
    }
}

impl Mul for &BiPoly {
    type Output = BiPoly;

    fn mul(self, rhs: &BiPoly) -> BiPoly {
        assert_eq!(self.t_arity, rhs.t_arity, "t-arity mismatch in mul");
        let mut out = BiPoly::zero(self.t_arity);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let a = e1.a.iter().zip(&e2.a).map(|(x, y)| x + y).collect();
                out.add_term(a, e1.b + e2.b, e1.c + e2.c, c1 * c2);
            }
        }
        out
    }
}

impl Neg for &BiPoly {
    type Output = BiPoly;

    fn neg(self) -> BiPoly {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Add for BiPoly {
    type Output = BiPoly;

    fn add(self, rhs: BiPoly) -> BiPoly {
        &self + &rhs
    }
}

impl Sub for BiPoly {
    type Output = BiPoly;

    fn sub(self, rhs: BiPoly) -> BiPoly {
        &self - &rhs
    }
}

impl Mul for BiPoly {
    type Output = BiPoly;

    fn mul(self, rhs: BiPoly) -> BiPoly {
        &self * &rhs
    }
}

impl fmt::Display for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({}{:+}i)", c.re, c.im)?;
            for (i, a) in e.a.iter().enumerate() {
                if *a > 0 {
                    write!(f, "·t{}^{a}", i + 1)?;
                }
            }
            if e.b > 0 {
                write!(f, "·w^{}", e.b)?;
            }
            if e.c > 0 {
                write!(f, "·w̄^{}", e.c)?;
            }
        }
        Ok(())
    }
}
