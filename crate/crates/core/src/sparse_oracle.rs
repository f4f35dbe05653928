//! Test-only symbolic calculus on trigonometric polynomials stored as sparse
//! maps `k -> c_k`. Products are exact convolutions with no truncation, so it
//! serves as an independent oracle for the FFT-based field operations.

use std::collections::BTreeMap;

use crate::spectral::{Complex64, PeriodicField};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly(pub BTreeMap<i64, Complex64>);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl Poly {
    pub fn constant(a: f64) -> Self {
        Self::from_pairs(&[(0, c(a, 0.0))])
    }

    pub fn from_pairs(pairs: &[(i64, Complex64)]) -> Self {
        let mut m = BTreeMap::new();
        for &(k, v) in pairs {
            *m.entry(k).or_insert(c(0.0, 0.0)) += v;
        }
        Poly(m)
    }

    /// `a cos(kx)`.
    pub fn cosine(a: f64, k: i64) -> Self {
        Self::from_pairs(&[(k, c(a / 2.0, 0.0)), (-k, c(a / 2.0, 0.0))])
    }

    /// `a sin(kx)`.
    pub fn sine(a: f64, k: i64) -> Self {
        Self::from_pairs(&[(k, c(0.0, -a / 2.0)), (-k, c(0.0, a / 2.0))])
    }

    pub fn get(&self, k: i64) -> Complex64 {
        self.0.get(&k).copied().unwrap_or(c(0.0, 0.0))
    }

    fn map(&self, f: impl Fn(i64, Complex64) -> Complex64) -> Self {
        Poly(self.0.iter().map(|(&k, &v)| (k, f(k, v))).collect())
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (&k, &v) in &o.0 {
            *out.0.entry(k).or_insert(c(0.0, 0.0)) += v;
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(c(-1.0, 0.0)))
    }

    pub fn scale(&self, a: Complex64) -> Self {
        self.map(|_, v| v * a)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = BTreeMap::new();
        for (&ka, &va) in &self.0 {
            for (&kb, &vb) in &o.0 {
                *out.entry(ka + kb).or_insert(c(0.0, 0.0)) += va * vb;
            }
        }
        Poly(out).pruned(0.0)
    }

    /// Drop coefficients with `|c| ≤ tol`.
    pub fn pruned(mut self, tol: f64) -> Self {
        self.0.retain(|_, v| v.norm() > tol);
        self
    }

    pub fn deriv(&self) -> Self {
        self.map(|k, v| v * c(0.0, k as f64))
    }

    /// Zero-mean primitive (drops `k = 0`).
    pub fn antideriv(&self) -> Self {
        let mut out = self.map(|k, v| if k == 0 { c(0.0, 0.0) } else { v * c(0.0, -1.0 / k as f64) });
        out.0.remove(&0);
        out
    }

    pub fn hilbert(&self) -> Self {
        self.map(|k, v| v * c(0.0, -(k.signum() as f64)))
    }

    pub fn plus(&self) -> Self {
        Poly(self.0.iter().filter(|(&k, _)| k > 0).map(|(&k, &v)| (k, v)).collect())
    }

    pub fn minus(&self) -> Self {
        Poly(self.0.iter().filter(|(&k, _)| k < 0).map(|(&k, &v)| (k, v)).collect())
    }

    pub fn mean(&self) -> Complex64 {
        self.get(0)
    }

    pub fn nonconstant(&self) -> Self {
        let mut out = self.clone();
        out.0.remove(&0);
        out
    }

    pub fn conj(&self) -> Self {
        Poly(self.0.iter().map(|(&k, &v)| (-k, v.conj())).collect())
    }

    /// `e^{i·scale·F}` by Taylor series, pruning tiny coefficients.
    pub fn exp_i(&self, scale: f64) -> Self {
        let arg = self.scale(c(0.0, scale));
        let mut term = Poly::constant(1.0);
        let mut sum = term.clone();
        for j in 1..60 {
            term = term.mul(&arg).scale(c(1.0 / j as f64, 0.0)).pruned(1e-30);
            if term.0.is_empty() {
                break;
            }
            sum = sum.add(&term);
        }
        sum.pruned(1e-30)
    }

    /// Largest coefficient difference against a field, over the field's band.
    pub fn max_diff(&self, f: &PeriodicField) -> f64 {
        let g = f.grid();
        let kmax = g.max_wavenumber();
        (-kmax..=kmax)
            .map(|k| (self.get(k) - f.coeff(k)).norm())
            .fold(0.0, f64::max)
    }
}
