//! Integrating-factor RK4.
//!
//! Writing `f(t) = W(t)g(t)` removes the dispersive term exactly; classical
//! RK4 is then applied to `∂_t g = W(-t) N(W(t) g)`. With `E = W(dt/2)` one
//! step reads
//!
//! ```text
//! k1 = N(f)
//! k2 = N(E(f + dt/2 k1))
//! k3 = N(E f + dt/2 k2)
//! k4 = N(E² f + dt E k3)
//! f' = E² f + dt/6 (E² k1 + 2E(k2 + k3) + k4)
//! ```
//!
//! The phase rotation per step at the top mode is `dt (N/2)²`; keeping it
//! below one radian (`dt ≤ 4/N²`) is recommended but not enforced.

use serde::{Deserialize, Serialize};

use crate::equations::{EquationSpec, Trajectory};
use crate::error::{Error, Result};
use crate::spectral::{Complex64, PeriodicField};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[default]
    Ifrk4,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    /// Abort once `max|u|` on the grid exceeds this.
    pub blowup_threshold: f64,
    /// Keep every `snapshot_stride`-th step.
    pub snapshot_stride: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 1.0,
            scheme: Scheme::Ifrk4,
            blowup_threshold: 1e6,
            snapshot_stride: 1,
        }
    }
}

impl IntegratorConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            ..Self::default()
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.snapshot_stride = stride;
        self
    }

    /// Number of steps, validating that `t_end` is a multiple of `dt` and of
    /// the snapshot spacing.
    pub fn n_steps(&self) -> Result<usize> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "t_end must be non-negative, got {}",
                self.t_end
            )));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::InvalidParameter("snapshot_stride must be positive".into()));
        }
        let ratio = self.t_end / self.dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "t_end = {} is not a multiple of dt = {}",
                self.t_end, self.dt
            )));
        }
        let steps = steps as usize;
        if !steps.is_multiple_of(self.snapshot_stride) {
            return Err(Error::InvalidParameter(format!(
                "{steps} steps not divisible by snapshot_stride {}",
                self.snapshot_stride
            )));
        }
        Ok(steps)
    }
}

/// `dt/6 (E²k1 + 2E(k2 + k3) + k4)`, the nonlinear part of one step from `f`.
fn increment(spec: &EquationSpec, f: &PeriodicField, dt: f64) -> PeriodicField {
    let half = 0.5 * dt;
    let e = |g: &PeriodicField| g.propagate_free(half);
    let k1 = spec.nonlinear(f);
    let k2 = spec.nonlinear(&e(&(f + &k1.scale(half))));
    let ef = e(f);
    let k3 = spec.nonlinear(&(&ef + &k2.scale(half)));
    let k4 = spec.nonlinear(&(&e(&ef) + &e(&k3).scale(dt)));
    let mid = e(&(&(&e(&k1) + &k2.scale(2.0)) + &k3.scale(2.0)));
    (&mid + &k4).scale(dt / 6.0)
}

/// One IF-RK4 step of size `dt` (negative `dt` integrates backwards).
pub fn step(spec: &EquationSpec, f: &PeriodicField, dt: f64) -> PeriodicField {
    &f.propagate_free(dt) + &increment(spec, f, dt)
}

/// Error-free `a + b = s + e`.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bv = s - a;
    (s, (a - (s - bv)) + (b - bv))
}

/// The same scheme carried in the interaction picture `g = W(-t)f`: the
/// stored state only receives the O(dt) increments, accumulated with
/// compensated summation, so rounding does not build up through repeated
/// phase rotations of the full state. Times are `n·dt`, never accumulated.
struct InteractionPicture {
    spec: EquationSpec,
    dt: f64,
    n: u64,
    hi: PeriodicField,
    lo: Vec<Complex64>,
}

impl InteractionPicture {
    fn new(spec: &EquationSpec, u0: &PeriodicField, dt: f64) -> Self {
        Self {
            spec: *spec,
            dt,
            n: 0,
            hi: u0.clone(),
            lo: vec![Complex64::new(0.0, 0.0); u0.grid().n_modes()],
        }
    }

    fn time(&self) -> f64 {
        self.n as f64 * self.dt
    }

    fn field(&self) -> PeriodicField {
        self.hi.propagate_free(self.time())
    }

    fn advance(&mut self) {
        let f = self.field();
        let inc = increment(&self.spec, &f, self.dt).propagate_free(-((self.n + 1) as f64 * self.dt));
        let mut coeffs = self.hi.coeffs().to_vec();
        for ((c, lo), d) in coeffs.iter_mut().zip(self.lo.iter_mut()).zip(inc.coeffs()) {
            let (re, e_re) = two_sum(c.re, d.re + lo.re);
            let (im, e_im) = two_sum(c.im, d.im + lo.im);
            *c = Complex64::new(re, im);
            *lo = Complex64::new(e_re, e_im);
        }
        // mirrored operations keep exact conjugate symmetry
        self.hi = PeriodicField::from_coeffs_unchecked(self.hi.grid(), coeffs, self.hi.is_real());
        self.n += 1;
    }
}

/// A step followed by the blow-up check.
pub fn checked_step(
    spec: &EquationSpec,
    f: &PeriodicField,
    dt: f64,
    blowup_threshold: f64,
) -> std::result::Result<PeriodicField, (PeriodicField, f64)> {
    let next = step(spec, f, dt);
    let max_abs = next.max_abs();
    if !max_abs.is_finite() || max_abs > blowup_threshold {
        Err((next, max_abs))
    } else {
        Ok(next)
    }
}

fn requires_real(spec: &EquationSpec) -> bool {
    !matches!(spec, EquationSpec::Linear)
}

/// Integrate from `t = 0`, recording the initial datum and every
/// `snapshot_stride`-th step.
pub fn simulate(spec: &EquationSpec, u0: &PeriodicField, config: &IntegratorConfig) -> Result<Trajectory> {
    let steps = config.n_steps()?;
    if requires_real(spec) && !u0.is_real() {
        return Err(Error::InvalidParameter(format!("{spec} needs a real initial datum")));
    }
    let stride = config.snapshot_stride;
    let mut traj = Trajectory::new(u0.grid(), 0.0, config.dt * stride as f64, vec![u0.clone()])?;
    let mut state = InteractionPicture::new(spec, u0, config.dt);
    for n in 1..=steps {
        state.advance();
        let current = state.field();
        let max_abs = current.max_abs();
        if !max_abs.is_finite() || max_abs > config.blowup_threshold {
            return Err(Error::BlowUp {
                time: n as f64 * config.dt,
                max_abs,
                threshold: config.blowup_threshold,
                partial: Box::new(traj),
            });
        }
        if n % stride == 0 {
            traj.push(current);
        }
    }
    Ok(traj)
}

/// Final state only, without storing snapshots.
pub fn evolve(spec: &EquationSpec, u0: &PeriodicField, dt: f64, t_end: f64) -> Result<PeriodicField> {
    let config = IntegratorConfig::new(dt, t_end).with_stride(1);
    let steps = config.n_steps()?;
    let mut state = InteractionPicture::new(spec, u0, dt);
    for _ in 0..steps {
        state.advance();
    }
    let out = state.field();
    let max_abs = out.max_abs();
    if !max_abs.is_finite() || max_abs > config.blowup_threshold {
        return Err(Error::BlowUp {
            time: t_end,
            max_abs,
            threshold: config.blowup_threshold,
            partial: Box::new(Trajectory::new(u0.grid(), 0.0, dt, vec![u0.clone()])?),
        });
    }
    Ok(out)
}
