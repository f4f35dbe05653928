//! Norms on discrete data, all in the unnormalized convention
//! `φ̂(ξ) = ∫ e^{-iξx} φ(x) dx = 2π c_ξ`, `⟨ξ⟩ = (1 + ξ²)^{1/2}`.
//!
//! Space-time norms act on a [`SpaceTimeBlock`]: the snapshots of a
//! trajectory multiplied by a fixed smooth taper (the bump `η₀` stretched so
//! its support is the window), transformed in time with a length-`M` DFT.
//! The dual grid is `τ_j = 2πj/(M h)`, `j ∈ [-M/2, M/2)`, with `h` the
//! snapshot spacing; with that spacing the discrete Plancherel identity is
//! exact, `‖u‖_{X^{0,0}} = 2π ‖taper·u‖_{L²_{t,x}}`.
//!
//! Unpaired Nyquist rows (`τ = -π/h`, `ξ = -N/2`) are split evenly between
//! the two aliases `±`, which keeps `u ↦ ū` an exact isometry.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::equations::Trajectory;
use crate::error::{Error, Result};
use crate::spectral::{
    bump_eta0, dyadic_range, forward_in_place, Complex64, Grid, PeriodicField, TWO_PI,
};

fn bracket(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}

/// `(Σ_k ⟨k⟩^{2s} |2π c_k|²)^{1/2}`.
pub fn sobolev_norm(f: &PeriodicField, s: f64) -> f64 {
    let g = f.grid();
    let sum: f64 = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let k = g.wavenumber(j) as f64;
            (1.0 + k * k).powf(s) * c.norm_sqr()
        })
        .sum();
    TWO_PI * sum.sqrt()
}

/// `J^s f` with `Ĵ^s = ⟨ξ⟩^s`.
pub fn bessel_potential(f: &PeriodicField, s: f64) -> PeriodicField {
    f.apply_real_multiplier(|k| bracket(k as f64).powf(s))
}

/// `‖f‖_{L^q}` by the trapezoid rule on the 2N-point grid; `q = ∞` gives the
/// sampled maximum.
pub fn lq_norm(f: &PeriodicField, q: f64) -> f64 {
    let m = 2 * f.grid().n_modes();
    let samples = f.synthesize_padded(m);
    lq_of_samples(&samples, q)
}

fn lq_of_samples(samples: &[Complex64], q: f64) -> f64 {
    if q.is_infinite() {
        return samples.iter().map(|z| z.norm()).fold(0.0, f64::max);
    }
    let h = TWO_PI / samples.len() as f64;
    let sum: f64 = samples.iter().map(|z| z.norm().powf(q)).sum();
    (h * sum).powf(1.0 / q)
}

/// `‖J^s f‖_{L^q}`.
pub fn sobolev_q_norm(f: &PeriodicField, s: f64, q: f64) -> f64 {
    lq_norm(&bessel_potential(f, s), q)
}

/// `sup_t ‖u(t)‖_{H^s}` over the snapshots.
pub fn sup_sobolev(traj: &Trajectory, s: f64) -> f64 {
    traj.snapshots().iter().map(|f| sobolev_norm(f, s)).fold(0.0, f64::max)
}

/// Spatial norm inside mixed and tilde norms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpatialNorm {
    /// `L^q_x`
    Lq(f64),
    /// `H^s_q`
    Hsq { s: f64, q: f64 },
}

impl SpatialNorm {
    pub fn eval(&self, f: &PeriodicField) -> f64 {
        match *self {
            SpatialNorm::Lq(q) => lq_norm(f, q),
            SpatialNorm::Hsq { s, q } => sobolev_q_norm(f, s, q),
        }
    }
}

/// `(∫ a(t)^p dt)^{1/p}` by the trapezoid rule over snapshot values; `p = ∞`
/// is the max. A single snapshot spans no time and integrates to zero.
fn lp_time(values: &[f64], dt: f64, p: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().copied().fold(0.0, f64::max);
    }
    if values.len() < 2 {
        return 0.0;
    }
    let pow: Vec<f64> = values.iter().map(|v| v.powf(p)).collect();
    let inner: f64 = pow[1..pow.len() - 1].iter().sum();
    let sum = dt * (inner + 0.5 * (pow[0] + pow[pow.len() - 1]));
    sum.powf(1.0 / p)
}

/// `‖u‖_{L^p_t B}` over the trajectory's time span.
pub fn mixed_norm(traj: &Trajectory, p: f64, inner: SpatialNorm) -> f64 {
    let values: Vec<f64> = traj.snapshots().iter().map(|f| inner.eval(f)).collect();
    lp_time(&values, traj.dt(), p)
}

/// `‖u‖_{L^p_t L^q_x}`.
pub fn lp_lq_norm(traj: &Trajectory, p: f64, q: f64) -> f64 {
    mixed_norm(traj, p, SpatialNorm::Lq(q))
}

/// `‖u‖_{L̃^p_t B} = (Σ_k ‖P_{2^k} u‖²_{L^p_t B})^{1/2}`.
pub fn tilde_norm(traj: &Trajectory, p: f64, inner: SpatialNorm) -> f64 {
    let band = traj.grid().n_modes() as i64 / 2;
    dyadic_range(band)
        .map(|k| {
            let block = traj.map(|f| f.dyadic_project(k));
            mixed_norm(&block, p, inner).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

/// Time taper on `[t_a, t_b]`: `η₀` rescaled so `±8/5` land on the window
/// ends. Equal to 1 on the middle 78% of the window.
pub fn taper(t: f64, t_a: f64, t_b: f64) -> f64 {
    let r = 2.0 * (t - t_a) / (t_b - t_a) - 1.0;
    bump_eta0(1.6 * r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BourgainVariant {
    /// `‖⟨ξ⟩^s⟨τ+|ξ|ξ⟩^b û‖_{L²_τ ℓ²_ξ}`
    X,
    /// `‖⟨ξ⟩^s⟨τ+|ξ|ξ⟩^b û‖_{L²_τ ℓ¹_ξ}`
    Z,
}

pub const MIN_BLOCK_SNAPSHOTS: usize = 8;

/// Tapered space-time transform of a trajectory window.
#[derive(Clone, Debug)]
pub struct SpaceTimeBlock {
    grid: Grid,
    t_a: f64,
    t_b: f64,
    h: f64,
    taper: Vec<f64>,
    tapered: Vec<PeriodicField>,
    /// `û(τ_p, k)`, rows in DFT order over `p`, columns in field storage order.
    hat: Vec<Complex64>,
}

impl SpaceTimeBlock {
    pub fn new(traj: &Trajectory) -> Result<Self> {
        Self::from_window(traj, 0..traj.len())
    }

    pub fn from_window(traj: &Trajectory, range: Range<usize>) -> Result<Self> {
        if range.end > traj.len() || range.start >= range.end {
            return Err(Error::InvalidParameter(format!(
                "window {range:?} outside trajectory of {} snapshots",
                traj.len()
            )));
        }
        let m = range.len();
        if m < MIN_BLOCK_SNAPSHOTS {
            return Err(Error::TooFewSnapshots {
                needed: MIN_BLOCK_SNAPSHOTS,
                got: m,
            });
        }
        let grid = traj.grid();
        let n = grid.n_modes();
        let h = traj.dt();
        let t_a = traj.time(range.start);
        let t_b = traj.time(range.end - 1);
        let taper: Vec<f64> = range.clone().map(|i| taper(traj.time(i), t_a, t_b)).collect();
        let tapered: Vec<PeriodicField> = range
            .clone()
            .zip(&taper)
            .map(|(i, &w)| traj.snapshots()[i].scale(w))
            .collect();

        let mut hat = vec![Complex64::new(0.0, 0.0); m * n];
        let mut series = vec![Complex64::new(0.0, 0.0); m];
        for j in 0..n {
            for (slot, f) in series.iter_mut().zip(&tapered) {
                *slot = f.coeffs()[j] * TWO_PI;
            }
            forward_in_place(&mut series);
            for (p, &v) in series.iter().enumerate() {
                let tau = Self::tau_of(p, m, h);
                // shift the DFT origin from t_a to t = 0
                hat[p * n + j] = v * h * Complex64::from_polar(1.0, -tau * t_a);
            }
        }
        Ok(Self {
            grid,
            t_a,
            t_b,
            h,
            taper,
            tapered,
            hat,
        })
    }

    fn tau_of(p: usize, m: usize, h: f64) -> f64 {
        let signed = if p < m.div_ceil(2) { p as i64 } else { p as i64 - m as i64 };
        TWO_PI * signed as f64 / (m as f64 * h)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn window(&self) -> (f64, f64) {
        (self.t_a, self.t_b)
    }

    pub fn taper(&self) -> &[f64] {
        &self.taper
    }

    pub fn tau_modes(&self) -> usize {
        self.taper.len()
    }

    pub fn tau_spacing(&self) -> f64 {
        TWO_PI / (self.tau_modes() as f64 * self.h)
    }

    /// The τ grid in DFT order.
    pub fn taus(&self) -> Vec<f64> {
        let m = self.tau_modes();
        (0..m).map(|p| Self::tau_of(p, m, self.h)).collect()
    }

    /// Whether every free frequency `-|k|k` lies inside the τ band
    /// `[-π/h, π/h)`; otherwise modulation weights see aliased τ.
    pub fn resolves_dispersion(&self) -> bool {
        let kmax = (self.grid.n_modes() / 2) as f64;
        std::f64::consts::PI / self.h > kmax * kmax
    }

    fn tau_aliases(&self, p: usize) -> Vec<f64> {
        let m = self.tau_modes();
        let tau = Self::tau_of(p, m, self.h);
        if m.is_multiple_of(2) && p == m / 2 {
            vec![tau, -tau]
        } else {
            vec![tau]
        }
    }

    fn xi_aliases(&self, j: usize) -> Vec<f64> {
        let k = self.grid.wavenumber(j);
        if k == self.grid.nyquist() {
            vec![k as f64, -k as f64]
        } else {
            vec![k as f64]
        }
    }

    pub fn xsb_norm(&self, s: f64, b: f64, variant: BourgainVariant) -> f64 {
        let n = self.grid.n_modes();
        let m = self.tau_modes();
        let mut total = 0.0;
        for p in 0..m {
            let taus = self.tau_aliases(p);
            let row = &self.hat[p * n..(p + 1) * n];
            for &tau in &taus {
                let weight = |j: usize, pow: f64| -> f64 {
                    let xis = self.xi_aliases(j);
                    let w: f64 = xis
                        .iter()
                        .map(|&xi| (bracket(xi).powf(s) * bracket(tau + xi.abs() * xi).powf(b)).powf(pow))
                        .sum();
                    w / xis.len() as f64
                };
                let contrib = match variant {
                    BourgainVariant::X => row
                        .iter()
                        .enumerate()
                        .map(|(j, c)| weight(j, 2.0) * c.norm_sqr())
                        .sum::<f64>(),
                    BourgainVariant::Z => row
                        .iter()
                        .enumerate()
                        .map(|(j, c)| weight(j, 1.0) * c.norm())
                        .sum::<f64>()
                        .powi(2),
                };
                total += contrib / taus.len() as f64;
            }
        }
        (self.tau_spacing() * total).sqrt()
    }

    /// `‖u‖_{Y^s} = ‖u‖_{X^{s,1/2}} + ‖u‖_{Z^{s,0}}`.
    pub fn y_norm(&self, s: f64) -> f64 {
        self.xsb_norm(s, 0.5, BourgainVariant::X) + self.xsb_norm(s, 0.0, BourgainVariant::Z)
    }

    /// `‖taper·u‖_{L^q_{t,x}}` with the same time quadrature as the
    /// transform (the taper vanishes at both ends, so trapezoid and
    /// rectangle rules coincide).
    pub fn lq_norm(&self, q: f64) -> f64 {
        if q.is_infinite() {
            return self.tapered.iter().map(|f| lq_norm(f, q)).fold(0.0, f64::max);
        }
        let sum: f64 = self.tapered.iter().map(|f| lq_norm(f, q).powf(q)).sum();
        (self.h * sum).powf(1.0 / q)
    }
}

pub fn xsb_norm(block: &SpaceTimeBlock, s: f64, b: f64, variant: BourgainVariant) -> f64 {
    block.xsb_norm(s, b, variant)
}

pub fn y_norm(block: &SpaceTimeBlock, s: f64) -> f64 {
    block.y_norm(s)
}

/// Which norms [`norm_table`] evaluates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormRequest {
    /// `H^s` exponents, per snapshot.
    pub sobolev: Vec<f64>,
    /// `L^q` exponents, per snapshot (`inf` allowed).
    pub lebesgue: Vec<f64>,
    /// `(s, b)` pairs for `X^{s,b}`, per window.
    pub bourgain: Vec<[f64; 2]>,
    /// `Y^s` exponents, per window.
    pub y: Vec<f64>,
    /// Number of equal consecutive windows.
    pub windows: usize,
}

impl Default for NormRequest {
    fn default() -> Self {
        Self {
            sobolev: vec![0.0, 0.5, 1.0],
            lebesgue: vec![4.0],
            bourgain: vec![[0.0, 0.375]],
            y: Vec::new(),
            windows: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormRow {
    /// `"snapshot"` or `"window"`.
    pub scope: &'static str,
    pub index: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub norm: String,
    pub value: f64,
}

/// Snapshot norms for every snapshot, then window norms for every window.
pub fn norm_table(traj: &Trajectory, req: &NormRequest) -> Result<Vec<NormRow>> {
    let mut rows = Vec::new();
    for (m, f) in traj.snapshots().iter().enumerate() {
        let t = traj.time(m);
        let mut push = |norm: String, value: f64| {
            rows.push(NormRow {
                scope: "snapshot",
                index: m,
                t_start: t,
                t_end: t,
                norm,
                value,
            })
        };
        for &s in &req.sobolev {
            push(format!("H^{s}"), sobolev_norm(f, s));
        }
        for &q in &req.lebesgue {
            push(format!("L^{q}"), lq_norm(f, q));
        }
    }
    if req.bourgain.is_empty() && req.y.is_empty() {
        return Ok(rows);
    }
    if req.windows == 0 {
        return Err(Error::InvalidParameter("need at least one window".into()));
    }
    let len = traj.len() / req.windows;
    for w in 0..req.windows {
        let range = w * len..if w + 1 == req.windows { traj.len() } else { (w + 1) * len };
        let block = SpaceTimeBlock::from_window(traj, range)?;
        let (t_a, t_b) = block.window();
        let mut push = |norm: String, value: f64| {
            rows.push(NormRow {
                scope: "window",
                index: w,
                t_start: t_a,
                t_end: t_b,
                norm,
                value,
            })
        };
        for &[s, b] in &req.bourgain {
            push(format!("X^{{{s},{b}}}"), block.xsb_norm(s, b, BourgainVariant::X));
        }
        for &s in &req.y {
            push(format!("Y^{s}"), block.y_norm(s));
        }
    }
    Ok(rows)
}
