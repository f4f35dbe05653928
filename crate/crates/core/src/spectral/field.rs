use std::ops::{Add, Mul, Neg, Sub};

use rustfft::num_complex::Complex64;

use super::bump::{dyadic_multiplier, low_multiplier};
use super::fft::{forward_in_place, inverse_in_place};
use super::Grid;
use crate::error::{Error, Result};

const REALITY_TOL: f64 = 1e-13;
const MEAN_TOL: f64 = 1e-12;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Sharp frequency masks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Projection {
    /// `P₊`: strictly positive frequencies.
    Plus,
    /// `P₋`: strictly negative frequencies.
    Minus,
    /// `P_c`: the mean.
    Mean,
    /// `P_{≠c} = I - P_c`.
    NonConstant,
}

impl Projection {
    fn keeps(self, k: i64) -> bool {
        match self {
            Projection::Plus => k > 0,
            Projection::Minus => k < 0,
            Projection::Mean => k == 0,
            Projection::NonConstant => k != 0,
        }
    }
}

/// One spatial snapshot, stored as Fourier coefficients in FFT order.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicField {
    grid: Grid,
    coeffs: Vec<Complex64>,
    is_real: bool,
}

impl PeriodicField {
    pub fn zeros(grid: Grid, is_real: bool) -> Self {
        Self {
            grid,
            coeffs: vec![ZERO; grid.n_modes()],
            is_real,
        }
    }

    /// The constant function `value`.
    pub fn constant(grid: Grid, value: f64) -> Self {
        let mut f = Self::zeros(grid, true);
        f.coeffs[0] = Complex64::new(value, 0.0);
        f
    }

    /// Build from coefficients in FFT storage order, validating the
    /// conjugate symmetry of real fields.
    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>, is_real: bool) -> Result<Self> {
        if coeffs.len() != grid.n_modes() {
            return Err(Error::LengthMismatch {
                expected: grid.n_modes(),
                actual: coeffs.len(),
            });
        }
        let f = Self {
            grid,
            coeffs,
            is_real,
        };
        if is_real {
            let defect = f.reality_defect();
            if defect > REALITY_TOL {
                return Err(Error::NotReal { defect });
            }
        }
        Ok(f)
    }

    /// No reality check; for callers that preserve conjugate symmetry by
    /// construction.
    pub(crate) fn from_coeffs_unchecked(grid: Grid, coeffs: Vec<Complex64>, is_real: bool) -> Self {
        debug_assert_eq!(coeffs.len(), grid.n_modes());
        Self {
            grid,
            coeffs,
            is_real,
        }
    }

    /// Build from coefficients listed in ascending wavenumber order
    /// `-N/2, …, N/2-1`.
    pub fn from_ascending(grid: Grid, ascending: &[Complex64], is_real: bool) -> Result<Self> {
        let n = grid.n_modes();
        if ascending.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: ascending.len(),
            });
        }
        let mut coeffs = vec![ZERO; n];
        for (i, &c) in ascending.iter().enumerate() {
            let k = i as i64 - n as i64 / 2;
            coeffs[grid.index_of(k).expect("in range")] = c;
        }
        Self::from_coeffs(grid, coeffs, is_real)
    }

    /// Sparse construction from `(k, c_k)` pairs. For real fields only
    /// `k ≥ 0` need be given; the conjugate partners are filled in.
    pub fn from_modes(grid: Grid, is_real: bool, modes: &[(i64, Complex64)]) -> Result<Self> {
        let mut coeffs = vec![ZERO; grid.n_modes()];
        for &(k, c) in modes {
            let j = grid.index_of(k).ok_or_else(|| {
                Error::InvalidParameter(format!("wavenumber {k} outside grid of {} modes", grid.n_modes()))
            })?;
            coeffs[j] += c;
            if is_real && k > 0 {
                coeffs[grid.index_of(-k).expect("partner")] += c.conj();
            }
        }
        Self::from_coeffs(grid, coeffs, is_real)
    }

    /// `cos(kx)` scaled by `amplitude`.
    pub fn cosine(grid: Grid, amplitude: f64, k: i64) -> Result<Self> {
        if k == 0 {
            return Ok(Self::constant(grid, amplitude));
        }
        Self::from_modes(grid, true, &[(k.abs(), Complex64::new(amplitude / 2.0, 0.0))])
    }

    /// Analyze samples `f(x_j)`, `x_j = 2πj/N`, into coefficients.
    pub fn analyze(grid: Grid, samples: &[Complex64], is_real: bool) -> Result<Self> {
        let n = grid.n_modes();
        if samples.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: samples.len(),
            });
        }
        let mut buf = samples.to_vec();
        forward_in_place(&mut buf);
        let scale = 1.0 / n as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        let mut f = Self {
            grid,
            coeffs: buf,
            is_real,
        };
        if is_real {
            let defect = f.reality_defect();
            if defect > REALITY_TOL {
                return Err(Error::NotReal { defect });
            }
            f.symmetrize();
        }
        Ok(f)
    }

    pub fn analyze_real(grid: Grid, samples: &[f64]) -> Result<Self> {
        let s: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::analyze(grid, &s, true)
    }

    /// Values on the `N` collocation points.
    pub fn synthesize(&self) -> Vec<Complex64> {
        let mut buf = self.coeffs.clone();
        inverse_in_place(&mut buf);
        buf
    }

    pub fn synthesize_real(&self) -> Vec<f64> {
        self.synthesize().into_iter().map(|z| z.re).collect()
    }

    /// Values on a refined uniform grid of `m ≥ N` points (zero padding).
    /// The Nyquist mode is split symmetrically for real fields so the samples
    /// stay real.
    pub fn synthesize_padded(&self, m: usize) -> Vec<Complex64> {
        let mut buf = self.padded_coeffs(m);
        inverse_in_place(&mut buf);
        buf
    }

    fn padded_coeffs(&self, m: usize) -> Vec<Complex64> {
        let n = self.grid.n_modes();
        assert!(m >= n, "padding target {m} smaller than {n}");
        let mut buf = vec![ZERO; m];
        for (j, &c) in self.coeffs.iter().enumerate() {
            let k = self.grid.wavenumber(j);
            if k == self.grid.nyquist() && m > n {
                if self.is_real {
                    let half = c * 0.5;
                    buf[(m as i64 + k) as usize] += half;
                    buf[(-k) as usize] += half;
                } else {
                    buf[(m as i64 + k) as usize] += c;
                }
                continue;
            }
            let idx = if k >= 0 { k as usize } else { (m as i64 + k) as usize };
            buf[idx] = c;
        }
        buf
    }

    /// Analyze values sampled on a refined grid of `m ≥ N` points and keep
    /// the modes `|k| < N/2` (the Nyquist slot is left empty).
    pub(crate) fn from_padded_samples(
        grid: Grid,
        mut samples: Vec<Complex64>,
        is_real: bool,
    ) -> Self {
        let m = samples.len();
        forward_in_place(&mut samples);
        let scale = 1.0 / m as f64;
        let mut f = Self::zeros(grid, is_real);
        let kmax = grid.max_wavenumber();
        for k in -kmax..=kmax {
            let src = if k >= 0 { k as usize } else { (m as i64 + k) as usize };
            f.coeffs[grid.index_of(k).unwrap()] = samples[src] * scale;
        }
        if is_real {
            f.symmetrize();
        }
        f
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn is_real(&self) -> bool {
        self.is_real
    }

    /// Coefficients in FFT storage order.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficients in ascending wavenumber order.
    pub fn ascending(&self) -> Vec<Complex64> {
        let n = self.grid.n_modes() as i64;
        (-n / 2..n / 2)
            .map(|k| self.coeffs[self.grid.index_of(k).unwrap()])
            .collect()
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        self.grid.index_of(k).map_or(ZERO, |j| self.coeffs[j])
    }

    /// `c_0`, the mean value `P_c f`.
    pub fn mean(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// `(Σ|c_k|²)^{1/2}`.
    pub fn coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest `|c_k - d_k|`.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        self.check_grid(other).expect("grid mismatch");
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest `|f(x)|` over the collocation points.
    pub fn max_abs(&self) -> f64 {
        self.synthesize().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn reality_defect(&self) -> f64 {
        let scale = self.coeff_norm().max(f64::MIN_POSITIVE);
        let mut defect: f64 = 0.0;
        for (j, &c) in self.coeffs.iter().enumerate() {
            let k = self.grid.wavenumber(j);
            let partner = if k == self.grid.nyquist() {
                c
            } else {
                self.coeffs[self.grid.index_of(-k).unwrap()]
            };
            defect = defect.max((c - partner.conj()).norm());
        }
        defect / scale
    }

    /// Force exact conjugate symmetry.
    fn symmetrize(&mut self) {
        let n = self.grid.n_modes();
        self.coeffs[0].im = 0.0;
        self.coeffs[n / 2].im = 0.0;
        for j in 1..n / 2 {
            let a = self.coeffs[j];
            let b = self.coeffs[n - j];
            let avg = (a + b.conj()) * 0.5;
            self.coeffs[j] = avg;
            self.coeffs[n - j] = avg.conj();
        }
    }

    fn check_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch {
                left: self.grid.n_modes(),
                right: other.grid.n_modes(),
            });
        }
        Ok(())
    }

    fn zero_nyquist(&mut self) {
        let j = self.grid.n_modes() / 2;
        self.coeffs[j] = ZERO;
    }

    /// Apply `c_k ↦ m(k) c_k`. The multiplier must satisfy
    /// `m(-k) = conj(m(k))` when `keeps_real` is claimed.
    fn apply_symbol(&self, keeps_real: bool, symbol: impl Fn(i64) -> Complex64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, &c)| c * symbol(self.grid.wavenumber(j)))
            .collect();
        Self {
            grid: self.grid,
            coeffs,
            is_real: self.is_real && keeps_real,
        }
    }

    /// Real even multiplier `m(k)`.
    pub fn apply_real_multiplier(&self, m: impl Fn(i64) -> f64) -> Self {
        self.apply_symbol(true, |k| Complex64::new(m(k), 0.0))
    }

    /// `Ĥf(k) = -i sgn(k) f̂(k)`.
    pub fn hilbert(&self) -> Self {
        let mut out = self.apply_symbol(true, |k| match k.signum() {
            1 => -I,
            -1 => I,
            _ => ZERO,
        });
        out.zero_nyquist();
        out
    }

    pub fn derivative(&self) -> Self {
        let mut out = self.apply_symbol(true, |k| Complex64::new(0.0, k as f64));
        out.zero_nyquist();
        out
    }

    /// `∂_x^ν` for `ν ≥ 0`.
    pub fn derivative_n(&self, order: u32) -> Self {
        (0..order).fold(self.clone(), |f, _| f.derivative())
    }

    /// Zero-mean primitive. Fails if `|c_0| > 1e-12·‖f‖`; otherwise `c_0`
    /// is discarded.
    pub fn antiderivative(&self) -> Result<Self> {
        self.antiderivative_with_tol(MEAN_TOL)
    }

    pub(crate) fn antiderivative_with_tol(&self, rel_tol: f64) -> Result<Self> {
        let tolerance = rel_tol * self.coeff_norm();
        let mean = self.mean().norm();
        if mean > tolerance {
            return Err(Error::NonZeroMean { mean, tolerance });
        }
        let mut out = self.apply_symbol(true, |k| {
            if k == 0 {
                ZERO
            } else {
                Complex64::new(0.0, -1.0 / k as f64)
            }
        });
        out.zero_nyquist();
        Ok(out)
    }

    pub fn project(&self, which: Projection) -> Self {
        let keeps_real = matches!(which, Projection::Mean | Projection::NonConstant);
        self.apply_symbol(keeps_real, |k| {
            if which.keeps(k) {
                Complex64::new(1.0, 0.0)
            } else {
                ZERO
            }
        })
    }

    /// Littlewood–Paley block `P_{2^k}`.
    pub fn dyadic_project(&self, k: u32) -> Self {
        self.apply_real_multiplier(|xi| dyadic_multiplier(k, xi as f64))
    }

    /// `P_{≤2^k}`.
    pub fn low_project(&self, k: u32) -> Self {
        self.apply_real_multiplier(|xi| low_multiplier(k, xi as f64))
    }

    /// `c_k ↦ e^{-itσ(k)} c_k`. On real fields the Nyquist slot is cleared
    /// because an odd symbol cannot keep it real.
    pub fn apply_exp_multiplier(&self, t: f64, sigma: impl Fn(i64) -> f64) -> Self {
        let mut out = self.apply_symbol(true, |k| Complex64::from_polar(1.0, -t * sigma(k)));
        if self.is_real {
            out.zero_nyquist();
        }
        out
    }

    /// Free propagator `W(t)`, symbol `|k|k`.
    pub fn propagate_free(&self, t: f64) -> Self {
        self.apply_exp_multiplier(t, |k| (k.abs() * k) as f64)
    }

    /// Translation `x ↦ f(x - shift)`.
    pub fn translate(&self, shift: f64) -> Self {
        let mut out = self.apply_symbol(true, |k| Complex64::from_polar(1.0, -(k as f64) * shift));
        if self.is_real {
            out.zero_nyquist();
        }
        out
    }

    /// Pointwise conjugate: `c_k ↦ conj(c_{-k})`.
    pub fn conj(&self) -> Self {
        if self.is_real {
            return self.clone();
        }
        let mut out = Self::zeros(self.grid, false);
        for (j, c) in out.coeffs.iter_mut().enumerate() {
            let k = self.grid.wavenumber(j);
            *c = if k == self.grid.nyquist() {
                self.coeffs[j].conj()
            } else {
                self.coeffs[self.grid.index_of(-k).unwrap()].conj()
            };
        }
        out
    }

    /// Reflection `x ↦ f(-x)`: `c_k ↦ c_{-k}`.
    pub fn reflect(&self) -> Self {
        let mut out = self.clone();
        for (j, c) in out.coeffs.iter_mut().enumerate() {
            let k = self.grid.wavenumber(j);
            if k != self.grid.nyquist() {
                *c = self.coeffs[self.grid.index_of(-k).unwrap()];
            }
        }
        out
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
            is_real: self.is_real,
        }
    }

    /// Multiply by a complex constant; the result is flagged complex.
    pub fn scale_complex(&self, a: Complex64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
            is_real: self.is_real && a.im == 0.0,
        }
    }

    /// Drop the reality flag (coefficients unchanged).
    pub fn into_complex(mut self) -> Self {
        self.is_real = false;
        self
    }

    /// The same trigonometric polynomial on another grid: modes
    /// `|k| < min(N, N')/2` are copied, everything else is dropped (so the
    /// Nyquist mode survives only when the grid is unchanged).
    pub fn resample(&self, grid: Grid) -> Self {
        if grid == self.grid {
            return self.clone();
        }
        let kmax = grid.max_wavenumber().min(self.grid.max_wavenumber());
        let mut out = Self::zeros(grid, self.is_real);
        for k in -kmax..=kmax {
            out.coeffs[grid.index_of(k).unwrap()] = self.coeff(k);
        }
        out
    }

    /// Treat as real, projecting onto the conjugate-symmetric part.
    pub fn real_part(&self) -> Self {
        let mut out = self.clone();
        out.is_real = true;
        out.symmetrize();
        out
    }

    /// Dealiased product: both factors are zero-padded to `2N` points,
    /// multiplied pointwise and truncated back to `|k| < N/2`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        let m = 2 * self.grid.n_modes();
        let a = self.synthesize_padded(m);
        let b = other.synthesize_padded(m);
        let prod: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        Ok(Self::from_padded_samples(
            self.grid,
            prod,
            self.is_real && other.is_real,
        ))
    }

    /// Apply `g` pointwise on the `2N` grid and truncate, as used for
    /// `e^{ikF}`. Returns the field and the relative energy of the discarded
    /// modes `|k| ≥ N/2`.
    pub(crate) fn map_pointwise_padded(
        &self,
        is_real: bool,
        g: impl Fn(Complex64) -> Complex64,
    ) -> (Self, f64) {
        let m = 2 * self.grid.n_modes();
        let mut vals: Vec<Complex64> = self.synthesize_padded(m).into_iter().map(g).collect();
        forward_in_place(&mut vals);
        let scale = 1.0 / m as f64;
        vals.iter_mut().for_each(|c| *c *= scale);
        let kmax = self.grid.max_wavenumber();
        let mut total = 0.0;
        let mut tail = 0.0;
        let mut f = Self::zeros(self.grid, is_real);
        for (j, &c) in vals.iter().enumerate() {
            let k = if j < m / 2 { j as i64 } else { j as i64 - m as i64 };
            total += c.norm_sqr();
            if k.abs() <= kmax {
                f.coeffs[self.grid.index_of(k).unwrap()] = c;
            } else {
                tail += c.norm_sqr();
            }
        }
        if is_real {
            f.symmetrize();
        }
        let ratio = if total > 0.0 { (tail / total).sqrt() } else { 0.0 };
        (f, ratio)
    }

    fn zip_with(&self, other: &Self, op: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        self.check_grid(other).expect("grid mismatch in field arithmetic");
        Self {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| op(a, b))
                .collect(),
            is_real: self.is_real && other.is_real,
        }
    }
}

impl Add for &PeriodicField {
    type Output = PeriodicField;
    fn add(self, rhs: &PeriodicField) -> PeriodicField {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &PeriodicField {
    type Output = PeriodicField;
    fn sub(self, rhs: &PeriodicField) -> PeriodicField {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Add for PeriodicField {
    type Output = PeriodicField;
    fn add(self, rhs: PeriodicField) -> PeriodicField {
        &self + &rhs
    }
}

impl Sub for PeriodicField {
    type Output = PeriodicField;
    fn sub(self, rhs: PeriodicField) -> PeriodicField {
        &self - &rhs
    }
}

impl Neg for &PeriodicField {
    type Output = PeriodicField;
    fn neg(self) -> PeriodicField {
        self.scale(-1.0)
    }
}

impl Neg for PeriodicField {
    type Output = PeriodicField;
    fn neg(self) -> PeriodicField {
        self.scale(-1.0)
    }
}

/// Dealiased product; panics on grid mismatch (see [`PeriodicField::multiply`]).
impl Mul for &PeriodicField {
    type Output = PeriodicField;
    fn mul(self, rhs: &PeriodicField) -> PeriodicField {
        self.multiply(rhs).expect("grid mismatch in field product")
    }
}

impl Mul<f64> for &PeriodicField {
    type Output = PeriodicField;
    fn mul(self, rhs: f64) -> PeriodicField {
        self.scale(rhs)
    }
}

impl Mul<Complex64> for &PeriodicField {
    type Output = PeriodicField;
    fn mul(self, rhs: Complex64) -> PeriodicField {
        self.scale_complex(rhs)
    }
}
