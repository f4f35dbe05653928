//! Right-hand sides of the mBO, Wicked-order and BO equations, their
//! conserved quantities, the translation map between mBO and Wicked-order
//! solutions, and trajectories.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{Complex64, Grid, PeriodicField, Projection, TWO_PI};

/// Sign of the cubic term `∓u²u_x`. Defocusing is the minus sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Focusing,
    Defocusing,
}

impl Sign {
    /// Coefficient multiplying `u²u_x` on the right-hand side.
    pub fn cubic_coefficient(self) -> f64 {
        match self {
            Sign::Focusing => 1.0,
            Sign::Defocusing => -1.0,
        }
    }

    /// Coefficient of `u⁴/12` in the energy: `+` when defocusing.
    pub fn energy_coefficient(self) -> f64 {
        -self.cubic_coefficient()
    }

    pub fn flipped(self) -> Sign {
        match self {
            Sign::Focusing => Sign::Defocusing,
            Sign::Defocusing => Sign::Focusing,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Focusing => "focusing",
            Sign::Defocusing => "defocusing",
        })
    }
}

impl FromStr for Sign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "focusing" => Ok(Sign::Focusing),
            "defocusing" => Ok(Sign::Defocusing),
            other => Err(Error::InvalidParameter(format!("unknown sign {other:?}"))),
        }
    }
}

/// Sign in front of `2P_{≠c}(w²)w_x` in the Wicked-order equation.
/// [`WickedSign::Plus`] is the form the gauge calculus is built on; the
/// other exists so the reduction experiment can test both.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WickedSign {
    Plus,
    Minus,
}

impl WickedSign {
    pub fn coefficient(self) -> f64 {
        match self {
            WickedSign::Plus => 2.0,
            WickedSign::Minus => -2.0,
        }
    }
}

impl fmt::Display for WickedSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WickedSign::Plus => "+",
            WickedSign::Minus => "-",
        })
    }
}

/// Which evolution equation to integrate. All share the linear part
/// `∂_t u = -H∂_x²u`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EquationSpec {
    /// `∂_t u + H∂_x²u = ∓u²u_x`.
    Mbo(Sign),
    /// `∂_t w + H∂_x²w = ±2P_{≠c}(w²)w_x`.
    Wicked(WickedSign),
    /// `∂_t u + H∂_x²u = u u_x`.
    Bo,
    /// Nonlinearity switched off: the free flow `W(t)`.
    Linear,
}

impl EquationSpec {
    pub fn wicked() -> Self {
        EquationSpec::Wicked(WickedSign::Plus)
    }

    /// Nonlinear part of `∂_t f`, products dealiased.
    pub fn nonlinear(&self, f: &PeriodicField) -> PeriodicField {
        match *self {
            EquationSpec::Mbo(sign) => {
                let cube_x = &(f * f) * &f.derivative();
                cube_x.scale(sign.cubic_coefficient())
            }
            EquationSpec::Wicked(sign) => {
                let sq = (f * f).project(Projection::NonConstant);
                (&sq * &f.derivative()).scale(sign.coefficient())
            }
            EquationSpec::Bo => f * &f.derivative(),
            EquationSpec::Linear => PeriodicField::zeros(f.grid(), f.is_real()),
        }
    }

    /// `∂_t f = -H∂_x²f + nonlinear(f)`.
    pub fn rhs(&self, f: &PeriodicField) -> PeriodicField {
        &linear_part(f) + &self.nonlinear(f)
    }
}

impl fmt::Display for EquationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EquationSpec::Mbo(sign) => write!(f, "mbo ({sign})"),
            EquationSpec::Wicked(sign) => write!(f, "wicked ({sign})"),
            EquationSpec::Bo => f.write_str("bo"),
            EquationSpec::Linear => f.write_str("linear"),
        }
    }
}

/// `-H∂_x² f`, symbol `-i|k|k`.
pub fn linear_part(f: &PeriodicField) -> PeriodicField {
    f.derivative().derivative().hilbert().scale(-1.0)
}

/// Free propagator `W(t)`.
pub fn propagate_free(f: &PeriodicField, t: f64) -> PeriodicField {
    f.propagate_free(t)
}

/// Conserved quantities of real mBO: `(∫u, ∫u², ∫½uHu_x ± u⁴/12)` with the
/// `+` sign for defocusing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Invariants {
    pub mean: f64,
    pub momentum: f64,
    pub energy: f64,
}

pub fn mean_momentum_energy(f: &PeriodicField, sign: Sign) -> Invariants {
    let grid = f.grid();
    let mean = TWO_PI * f.mean().re;
    let mut momentum = 0.0;
    let mut dispersive = 0.0;
    for (j, c) in f.coeffs().iter().enumerate() {
        let k = grid.wavenumber(j);
        momentum += c.norm_sqr();
        dispersive += k.unsigned_abs() as f64 * c.norm_sqr();
    }
    momentum *= TWO_PI;
    dispersive *= TWO_PI;
    // u⁴ has degree < 2N, so the 2N-point trapezoid rule is exact.
    let m = 2 * grid.n_modes();
    let quartic: f64 = f
        .synthesize_padded(m)
        .iter()
        .map(|z| z.re.powi(4))
        .sum::<f64>()
        * TWO_PI
        / m as f64;
    Invariants {
        mean,
        momentum,
        energy: 0.5 * dispersive + sign.energy_coefficient() * quartic / 12.0,
    }
}

/// Time-ordered snapshots on a shared grid with uniform spacing `dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    grid: Grid,
    t0: f64,
    dt: f64,
    snapshots: Vec<PeriodicField>,
}

impl Trajectory {
    pub fn new(grid: Grid, t0: f64, dt: f64, snapshots: Vec<PeriodicField>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        if let Some(first) = snapshots.first() {
            let real = first.is_real();
            for s in &snapshots {
                if s.grid() != grid {
                    return Err(Error::GridMismatch {
                        left: grid.n_modes(),
                        right: s.grid().n_modes(),
                    });
                }
                if s.is_real() != real {
                    return Err(Error::InvalidParameter(
                        "snapshots disagree on the reality flag".into(),
                    ));
                }
            }
        }
        Ok(Self {
            grid,
            t0,
            dt,
            snapshots,
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn snapshots(&self) -> &[PeriodicField] {
        &self.snapshots
    }

    pub fn time(&self, m: usize) -> f64 {
        self.t0 + m as f64 * self.dt
    }

    pub fn last(&self) -> Option<&PeriodicField> {
        self.snapshots.last()
    }

    pub fn is_real(&self) -> bool {
        self.snapshots.first().is_none_or(|s| s.is_real())
    }

    pub(crate) fn push(&mut self, f: PeriodicField) {
        debug_assert_eq!(f.grid(), self.grid);
        self.snapshots.push(f);
    }

    /// Every `stride`-th snapshot.
    pub fn subsample(&self, stride: usize) -> Trajectory {
        let stride = stride.max(1);
        Trajectory {
            grid: self.grid,
            t0: self.t0,
            dt: self.dt * stride as f64,
            snapshots: self.snapshots.iter().step_by(stride).cloned().collect(),
        }
    }

    /// Snapshots `range`, keeping the time axis.
    pub fn window(&self, range: std::ops::Range<usize>) -> Trajectory {
        Trajectory {
            grid: self.grid,
            t0: self.time(range.start),
            dt: self.dt,
            snapshots: self.snapshots[range].to_vec(),
        }
    }

    pub fn map(&self, f: impl Fn(&PeriodicField) -> PeriodicField) -> Trajectory {
        Trajectory {
            grid: self.grid,
            t0: self.t0,
            dt: self.dt,
            snapshots: self.snapshots.iter().map(f).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TMapDirection {
    Forward,
    Inverse,
}

/// `w = (1/√2) u(t, x - X(t))` with `X(t) = ∫₀ᵗ (1/2π)∫u² dx ds` by the
/// composite trapezoid rule; the inverse recovers `X` from `∫u² = 2∫w²`.
pub fn t_map(traj: &Trajectory, direction: TMapDirection) -> Result<Trajectory> {
    if traj.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    if traj.t0() != 0.0 {
        return Err(Error::InvalidParameter(format!(
            "translation map needs t0 = 0, got {}",
            traj.t0()
        )));
    }
    if !traj.is_real() {
        return Err(Error::InvalidParameter("translation map needs a real trajectory".into()));
    }
    // (1/2π)∫u² dx = Σ|c_k|²; for the inverse, ∫u² = 2∫w².
    let density_factor = match direction {
        TMapDirection::Forward => 1.0,
        TMapDirection::Inverse => 2.0,
    };
    let densities: Vec<f64> = traj
        .snapshots()
        .iter()
        .map(|s| density_factor * s.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>())
        .collect();
    let mut shift = 0.0;
    let mut out = Vec::with_capacity(traj.len());
    for (m, snap) in traj.snapshots().iter().enumerate() {
        if m > 0 {
            shift += 0.5 * traj.dt() * (densities[m - 1] + densities[m]);
        }
        out.push(match direction {
            TMapDirection::Forward => snap.translate(shift).scale(std::f64::consts::FRAC_1_SQRT_2),
            TMapDirection::Inverse => snap.translate(-shift).scale(std::f64::consts::SQRT_2),
        });
    }
    Trajectory::new(traj.grid(), traj.t0(), traj.dt(), out)
}

/// Coefficients of `e^{ikx}` as a complex field, convenience for tests and
/// demos.
pub fn plane_wave(grid: Grid, k: i64) -> Result<PeriodicField> {
    PeriodicField::from_modes(grid, false, &[(k, Complex64::new(1.0, 0.0))])
}
