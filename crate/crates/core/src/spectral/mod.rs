//! Fourier-side operator calculus on 2π-periodic functions.
//!
//! A [`PeriodicField`] stores the coefficients `c_k` of
//! `φ(x) = Σ_k c_k e^{ikx}` for `k ∈ {-N/2, …, N/2-1}`. Norm routines in
//! [`crate::norms`] convert to the unnormalized transform `φ̂(k) = 2π c_k`;
//! nothing in this module does.
//!
//! Nyquist convention: the mode `k = -N/2` has no conjugate partner, so every
//! odd or complex multiplier (derivative, Hilbert transform, antiderivative,
//! the free propagator on real fields) and every dealiased product sets it to
//! zero. Pure indicator masks leave it untouched.

mod bump;
mod fft;
mod field;

pub use bump::{bump_eta0, dyadic_multiplier, dyadic_range, low_multiplier};
pub use field::{PeriodicField, Projection};

pub(crate) use fft::forward_in_place;

use crate::error::{Error, Result};

pub use rustfft::num_complex::Complex64;

pub const TWO_PI: f64 = std::f64::consts::TAU;

/// Uniform periodic discretization of `ℝ/2πℤ` with `N` Fourier modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Grid {
    n: usize,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(n));
        }
        Ok(Self { n })
    }

    pub fn n_modes(&self) -> usize {
        self.n
    }

    /// The unpaired mode `-N/2`.
    pub fn nyquist(&self) -> i64 {
        -(self.n as i64) / 2
    }

    /// Largest wavenumber with a conjugate partner, `N/2 - 1`.
    pub fn max_wavenumber(&self) -> i64 {
        self.n as i64 / 2 - 1
    }

    /// Wavenumber stored at storage slot `j` (FFT order).
    #[inline]
    pub fn wavenumber(&self, j: usize) -> i64 {
        if j < self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    /// Storage slot of wavenumber `k`; `None` outside `[-N/2, N/2)`.
    #[inline]
    pub fn index_of(&self, k: i64) -> Option<usize> {
        let half = self.n as i64 / 2;
        if k < -half || k >= half {
            None
        } else if k >= 0 {
            Some(k as usize)
        } else {
            Some((k + self.n as i64) as usize)
        }
    }

    /// Wavenumbers in storage order.
    pub fn wavenumbers(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.n).map(move |j| self.wavenumber(j))
    }

    /// Collocation points `x_j = 2πj/N`.
    pub fn points(&self) -> Vec<f64> {
        (0..self.n)
            .map(|j| TWO_PI * j as f64 / self.n as f64)
            .collect()
    }

    /// The grid with twice as many modes.
    pub fn refined(&self) -> Grid {
        Grid { n: 2 * self.n }
    }
}
