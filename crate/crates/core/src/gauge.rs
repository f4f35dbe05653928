//! Gauge transform of the Wicked-order equation.
//!
//! For a real `u`, `F = ∂_x^{-1}P_{≠c}(u²)` is the zero-mean primitive of
//! `u² - P_c(u²)` and `v = P₊(e^{-iF}u)`. When `u` solves
//!
//! ```text
//! ∂_t u + H∂_x²u = 2P_{≠c}(u²)u_x
//! ```
//!
//! the gauged unknown satisfies
//!
//! ```text
//! v_t - iv_xx = 2N⁰(u,v) + 2N¹(u,v) - 2iP₊(e^{-iF}uB(u,u)) + G(u)
//! ```
//!
//! with `N^ν(u,v) = -∂_x^ν P₊(∂_x^{-ν}P₊(e^{-iF}u²) ∂_xP₋(e^{-iF}v̄))`.
//!
//! The exponentials `e^{ikF}` are not band-limited. They are evaluated on
//! the doubled grid and truncated; the discarded relative energy is reported
//! as the truncation tail.

use rayon::prelude::*;

use crate::equations::Trajectory;
use crate::error::{Error, Result};
use crate::spectral::{Complex64, PeriodicField, Projection};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Mean tolerance for antiderivatives of one-signed products.
const ONE_SIGNED_MEAN_TOL: f64 = 1e-10;

/// `F = ∂_x^{-1}P_{≠c}(u²)`.
pub fn primitive_f(u: &PeriodicField) -> Result<PeriodicField> {
    (u * u).project(Projection::NonConstant).antiderivative()
}

/// `e^{ikF}` truncated to the grid band, with the relative truncation tail.
pub fn gauge_exp_with_tail(f: &PeriodicField, k: i32) -> (PeriodicField, f64) {
    let k = k as f64;
    f.map_pointwise_padded(false, |z| Complex64::from_polar(1.0, k * z.re))
}

/// `e^{ikF}` truncated to the grid band.
pub fn gauge_exp(f: &PeriodicField, k: i32) -> PeriodicField {
    gauge_exp_with_tail(f, k).0
}

/// `∂_x^{-1}` of a product that has zero mean by construction; checks the
/// mean really is negligible before discarding it.
fn antiderivative_of_zero_mean(p: &PeriodicField) -> Result<PeriodicField> {
    let tolerance = ONE_SIGNED_MEAN_TOL * p.coeff_norm();
    let mean = p.mean().norm();
    if mean > tolerance {
        return Err(Error::NonZeroMean { mean, tolerance });
    }
    p.project(Projection::NonConstant).antiderivative()
}

/// `B(f,g) = -i∂_x^{-1}(P₊f_x P₊g_x) + i∂_x^{-1}(P₋f_x P₋g_x)`.
pub fn bilinear_b(f: &PeriodicField, g: &PeriodicField) -> Result<PeriodicField> {
    let fx = f.derivative();
    let gx = g.derivative();
    let plus = &fx.project(Projection::Plus) * &gx.project(Projection::Plus);
    let minus = &fx.project(Projection::Minus) * &gx.project(Projection::Minus);
    let out = &antiderivative_of_zero_mean(&plus)?.scale_complex(-I)
        + &antiderivative_of_zero_mean(&minus)?.scale_complex(I);
    Ok(if f.is_real() && g.is_real() {
        out.real_part()
    } else {
        out
    })
}

/// Closed form of `∂_t F` along the Wicked-order flow:
/// `P_{≠c}((P_{≠c}u²)²) - 2uHu_x + 2P_c(uHu_x) + 2B(u,u)`.
pub fn f_t_formula(u: &PeriodicField) -> Result<PeriodicField> {
    let q = (u * u).project(Projection::NonConstant);
    let q2 = (&q * &q).project(Projection::NonConstant);
    let u_hux = u * &u.derivative().hilbert();
    let b = bilinear_b(u, u)?;
    Ok(&(&q2 - &u_hux.project(Projection::NonConstant).scale(2.0)) + &b.scale(2.0))
}

/// `R(u) = P₊(e^{-iF}u) - e^{-iF}P₊u`.
pub fn commutator_r(u: &PeriodicField, f: &PeriodicField) -> PeriodicField {
    commutator_with(u, &gauge_exp(f, -1))
}

fn commutator_with(u: &PeriodicField, exp_minus: &PeriodicField) -> PeriodicField {
    &(exp_minus * u).project(Projection::Plus) - &(exp_minus * &u.project(Projection::Plus))
}

/// Which recovery identity to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Recovery {
    /// `e^{iF}v - e^{iF}R(u)`, equal to `P₊u`.
    Plus,
    /// `P₋(e^{-iF}v̄) - P₋(e^{-iF}R̄)`, equal to `P₋u` for real `u`.
    Minus,
}

/// The gauge transform of one snapshot together with every auxiliary field
/// the gauged equation needs.
#[derive(Clone, Debug)]
pub struct GaugeState {
    pub u: PeriodicField,
    /// Zero-mean primitive `F`.
    pub f: PeriodicField,
    /// `e^{iF}`.
    pub exp_plus: PeriodicField,
    /// `e^{-iF}`.
    pub exp_minus: PeriodicField,
    /// `v = P₊(e^{-iF}u)`.
    pub v: PeriodicField,
    /// `R(u)`.
    pub r: PeriodicField,
    /// Relative energy of `e^{±iF}` beyond the grid band (the larger one).
    pub truncation_tail: f64,
}

/// `v = P₊(e^{-iF}u)` and its companions.
pub fn gauge_transform(u: &PeriodicField) -> Result<GaugeState> {
    if !u.is_real() {
        return Err(Error::InvalidParameter("gauge transform needs a real field".into()));
    }
    let f = primitive_f(u)?;
    let (exp_plus, tail_p) = gauge_exp_with_tail(&f, 1);
    let (exp_minus, tail_m) = gauge_exp_with_tail(&f, -1);
    let v = (&exp_minus * u).project(Projection::Plus);
    let r = &v - &(&exp_minus * &u.project(Projection::Plus));
    Ok(GaugeState {
        u: u.clone(),
        f,
        exp_plus,
        exp_minus,
        v,
        r,
        truncation_tail: tail_p.max(tail_m),
    })
}

/// `N^ν(u,v)` for `ν ∈ {0, 1}` given `e^{-iF}`.
pub fn n_operator(
    u: &PeriodicField,
    v: &PeriodicField,
    f: &PeriodicField,
    nu: u8,
) -> Result<PeriodicField> {
    n_operator_with(u, v, &gauge_exp(f, -1), nu)
}

fn n_operator_with(
    u: &PeriodicField,
    v: &PeriodicField,
    exp_minus: &PeriodicField,
    nu: u8,
) -> Result<PeriodicField> {
    let inner = (exp_minus * &(u * u)).project(Projection::Plus);
    let conj_part = (exp_minus * &v.conj()).project(Projection::Minus).derivative();
    match nu {
        0 => Ok(-(&inner * &conj_part).project(Projection::Plus)),
        1 => {
            let prim = inner.antiderivative()?;
            Ok(-(&prim * &conj_part).project(Projection::Plus).derivative())
        }
        other => Err(Error::InvalidParameter(format!("N^ν needs ν ∈ {{0,1}}, got {other}"))),
    }
}

/// Shared subexpressions of the source term.
struct SourceParts {
    /// `P_c(u H u_x)`.
    mean_u_hux: f64,
    /// `P_c((P_{≠c}u²)²)`.
    mean_q2: f64,
    /// `P_c(u²)`.
    mean_u2: f64,
    u2: PeriodicField,
    /// `∂_xP₋(e^{-iF} conj(R))`.
    d_conj_r: PeriodicField,
    /// `P₋u_x`.
    minus_ux: PeriodicField,
    /// `∂_x^{-1}P₊(e^{-iF})`.
    prim_plus_exp: PeriodicField,
}

impl SourceParts {
    fn new(u: &PeriodicField, exp_minus: &PeriodicField, r: &PeriodicField) -> Result<Self> {
        let u2 = u * u;
        let q = u2.project(Projection::NonConstant);
        let u_hux = u * &u.derivative().hilbert();
        Ok(Self {
            mean_u_hux: u_hux.mean().re,
            mean_q2: (&q * &q).mean().re,
            mean_u2: u2.mean().re,
            d_conj_r: (exp_minus * &r.conj()).project(Projection::Minus).derivative(),
            minus_ux: u.derivative().project(Projection::Minus),
            prim_plus_exp: exp_minus.project(Projection::Plus).antiderivative()?,
            u2,
        })
    }

    /// `2P_c(u²)(-P₊(e^{-iF}P₋u_x) + ∂_xP₊(∂_x^{-1}P₊(e^{-iF})P₋u_x))`.
    fn mean_correction(&self, exp_minus: &PeriodicField) -> PeriodicField {
        let a = (exp_minus * &self.minus_ux).project(Projection::Plus);
        let b = (&self.prim_plus_exp * &self.minus_ux)
            .project(Projection::Plus)
            .derivative();
        (&b - &a).scale(2.0 * self.mean_u2)
    }
}

/// Source term `G(u)` of the gauged equation, in the form obtained by
/// substituting the recovery identity for `P₋u` into the rewritten
/// right-hand side:
///
/// ```text
/// G(u) = P₊(e^{-iF}(-2iuP_c(uHu_x) + iuP_c((P_{≠c}u²)²) + 2u²∂_xP₋(e^{-iF}R̄)))
///      + 2∂_xP₊(∂_x^{-1}P₊(e^{-iF}u²) ∂_xP₋(e^{-iF}R̄))
///      + 2P_c(u²)(-P₊(e^{-iF}P₋u_x) + ∂_xP₊(∂_x^{-1}P₊(e^{-iF})P₋u_x))
/// ```
pub fn source_g(u: &PeriodicField, f: &PeriodicField, r: &PeriodicField) -> Result<PeriodicField> {
    source_g_with(u, &gauge_exp(f, -1), r)
}

fn source_g_with(
    u: &PeriodicField,
    exp_minus: &PeriodicField,
    r: &PeriodicField,
) -> Result<PeriodicField> {
    let p = SourceParts::new(u, exp_minus, r)?;
    let scalar = Complex64::new(0.0, -2.0 * p.mean_u_hux + p.mean_q2);
    let bracket = &u.scale_complex(scalar) + &(&p.u2 * &p.d_conj_r).scale(2.0);
    let first = (exp_minus * &bracket).project(Projection::Plus);
    let prim_u2 = (exp_minus * &p.u2).project(Projection::Plus).antiderivative()?;
    let second = (&prim_u2 * &p.d_conj_r)
        .project(Projection::Plus)
        .derivative()
        .scale(2.0);
    Ok(&(&first + &second) + &p.mean_correction(exp_minus))
}

/// The source term transcribed addend by addend from its published display:
///
/// ```text
/// P₊(e^{-iF}(-2iuP_c(uHu_x) + uP_c((P_{≠c}u²)²) + 2u²∂_xP₋(e^{-iF}R̄)))
/// - 2∂_xP₊(∂_x^{-1}P₊(e^{-iF})P₋u_x) + 2i∂_xP₊(e^{-iF}∂_xP₋(e^{-iF}R̄))
/// + 2P_c(u²)(-P₊(e^{-iF}P₋u_x) + ∂_xP₊(∂_x^{-1}P₊(e^{-iF})P₋u_x))
/// ```
///
/// Kept for comparison in the gauge residual report; it does not close the
/// gauged equation (see [`source_g`]).
pub fn source_g_as_printed(
    u: &PeriodicField,
    f: &PeriodicField,
    r: &PeriodicField,
) -> Result<PeriodicField> {
    source_g_as_printed_with(u, &gauge_exp(f, -1), r)
}

fn source_g_as_printed_with(
    u: &PeriodicField,
    exp_minus: &PeriodicField,
    r: &PeriodicField,
) -> Result<PeriodicField> {
    let p = SourceParts::new(u, exp_minus, r)?;
    let scalar = Complex64::new(p.mean_q2, -2.0 * p.mean_u_hux);
    let bracket = &u.scale_complex(scalar) + &(&p.u2 * &p.d_conj_r).scale(2.0);
    let first = (exp_minus * &bracket).project(Projection::Plus);
    let lone = (&p.prim_plus_exp * &p.minus_ux)
        .project(Projection::Plus)
        .derivative()
        .scale(-2.0);
    let conj_term = (exp_minus * &p.d_conj_r)
        .project(Projection::Plus)
        .derivative()
        .scale_complex(Complex64::new(0.0, 2.0));
    Ok(&(&(&first + &lone) + &conj_term) + &p.mean_correction(exp_minus))
}

/// Full `∂_t v = iv_xx + 2N⁰ + 2N¹ - 2iP₊(e^{-iF}uB(u,u)) + G(u)`.
pub fn gauged_rhs(
    u: &PeriodicField,
    v: &PeriodicField,
    f: &PeriodicField,
    r: &PeriodicField,
) -> Result<PeriodicField> {
    gauged_rhs_with(u, v, &gauge_exp(f, -1), r, source_g_with)
}

type SourceFn = fn(&PeriodicField, &PeriodicField, &PeriodicField) -> Result<PeriodicField>;

fn gauged_rhs_with(
    u: &PeriodicField,
    v: &PeriodicField,
    exp_minus: &PeriodicField,
    r: &PeriodicField,
    source: SourceFn,
) -> Result<PeriodicField> {
    let dispersive = v.derivative().derivative().scale_complex(I);
    let n0 = n_operator_with(u, v, exp_minus, 0)?;
    let n1 = n_operator_with(u, v, exp_minus, 1)?;
    let b = bilinear_b(u, u)?;
    let b_term = (exp_minus * &(u * &b))
        .project(Projection::Plus)
        .scale_complex(Complex64::new(0.0, -2.0));
    let g = source(u, exp_minus, r)?;
    Ok(&(&(&dispersive + &(&n0 + &n1).scale(2.0)) + &b_term) + &g)
}

/// Evaluate a recovery identity; the result should equal `P₊u` or `P₋u`.
pub fn recover(
    _u: &PeriodicField,
    v: &PeriodicField,
    f: &PeriodicField,
    r: &PeriodicField,
    which: Recovery,
) -> PeriodicField {
    match which {
        Recovery::Plus => {
            let exp_plus = gauge_exp(f, 1);
            &(&exp_plus * v) - &(&exp_plus * r)
        }
        Recovery::Minus => {
            let exp_minus = gauge_exp(f, -1);
            recover_minus_with(v, &exp_minus, r)
        }
    }
}

fn recover_minus_with(v: &PeriodicField, exp_minus: &PeriodicField, r: &PeriodicField) -> PeriodicField {
    &(exp_minus * &v.conj()).project(Projection::Minus)
        - &(exp_minus * &r.conj()).project(Projection::Minus)
}

/// Both sides of the rewrite of the two derivative-losing terms:
///
/// ```text
/// lhs = P₊(e^{-iF}(-4u²P₋u_x)) - 2iP₊(e^{-iF}P₋u_xx)
/// rhs = -2P₊(e^{-iF}u²P₋u_x) - 2∂_xP₊(∂_x^{-1}P₊(e^{-iF}u²)P₋u_x)
///       + 2P_c(u²)(∂_xP₊(∂_x^{-1}P₊(e^{-iF})P₋u_x) - P₊(e^{-iF}P₋u_x))
/// ```
pub fn rewrite_check(u: &PeriodicField, f: &PeriodicField) -> Result<(PeriodicField, PeriodicField)> {
    rewrite_check_with(u, &gauge_exp(f, -1))
}

fn rewrite_check_with(
    u: &PeriodicField,
    exp_minus: &PeriodicField,
) -> Result<(PeriodicField, PeriodicField)> {
    let u2 = u * u;
    let minus_ux = u.derivative().project(Projection::Minus);
    let minus_uxx = minus_ux.derivative();
    let lhs = &(exp_minus * &(&u2 * &minus_ux))
        .project(Projection::Plus)
        .scale(-4.0)
        - &(exp_minus * &minus_uxx)
            .project(Projection::Plus)
            .scale_complex(Complex64::new(0.0, 2.0));

    let a = (exp_minus * &(&u2 * &minus_ux)).project(Projection::Plus).scale(-2.0);
    let prim_u2 = (exp_minus * &u2).project(Projection::Plus).antiderivative()?;
    let b = (&prim_u2 * &minus_ux)
        .project(Projection::Plus)
        .derivative()
        .scale(-2.0);
    let prim_exp = exp_minus.project(Projection::Plus).antiderivative()?;
    let c1 = (&prim_exp * &minus_ux).project(Projection::Plus).derivative();
    let c2 = (exp_minus * &minus_ux).project(Projection::Plus);
    let c = (&c1 - &c2).scale(2.0 * u2.mean().re);
    Ok((lhs, &(&a + &b) + &c))
}

impl GaugeState {
    pub fn n_operator(&self, nu: u8) -> Result<PeriodicField> {
        n_operator_with(&self.u, &self.v, &self.exp_minus, nu)
    }

    pub fn source_g(&self) -> Result<PeriodicField> {
        source_g_with(&self.u, &self.exp_minus, &self.r)
    }

    pub fn source_g_as_printed(&self) -> Result<PeriodicField> {
        source_g_as_printed_with(&self.u, &self.exp_minus, &self.r)
    }

    /// `∂_t v` predicted by the gauged equation.
    pub fn gauged_rhs(&self) -> Result<PeriodicField> {
        gauged_rhs_with(&self.u, &self.v, &self.exp_minus, &self.r, source_g_with)
    }

    /// As [`GaugeState::gauged_rhs`] but with the transcribed source term.
    pub fn gauged_rhs_as_printed(&self) -> Result<PeriodicField> {
        gauged_rhs_with(
            &self.u,
            &self.v,
            &self.exp_minus,
            &self.r,
            source_g_as_printed_with,
        )
    }

    pub fn recover(&self, which: Recovery) -> PeriodicField {
        match which {
            Recovery::Plus => &(&self.exp_plus * &self.v) - &(&self.exp_plus * &self.r),
            Recovery::Minus => recover_minus_with(&self.v, &self.exp_minus, &self.r),
        }
    }

    pub fn rewrite_check(&self) -> Result<(PeriodicField, PeriodicField)> {
        rewrite_check_with(&self.u, &self.exp_minus)
    }

    pub fn f_t_formula(&self) -> Result<PeriodicField> {
        f_t_formula(&self.u)
    }
}

/// A real trajectory together with the gauge state of every snapshot.
#[derive(Clone, Debug)]
pub struct GaugedTrajectory {
    base: Trajectory,
    states: Vec<GaugeState>,
}

impl GaugedTrajectory {
    pub fn new(base: Trajectory) -> Result<Self> {
        let states = base
            .snapshots()
            .par_iter()
            .map(gauge_transform)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { base, states })
    }

    pub fn base(&self) -> &Trajectory {
        &self.base
    }

    pub fn states(&self) -> &[GaugeState] {
        &self.states
    }

    /// `v(t)` as a (complex) trajectory.
    pub fn v(&self) -> Trajectory {
        let snaps = self.states.iter().map(|s| s.v.clone()).collect();
        Trajectory::new(self.base.grid(), self.base.t0(), self.base.dt(), snaps)
            .expect("same grid and spacing as the base")
    }

    pub fn max_truncation_tail(&self) -> f64 {
        self.states.iter().map(|s| s.truncation_tail).fold(0.0, f64::max)
    }
}
