//! Verification studies, each producing a [`DiagnosticsReport`].
//!
//! A report is a flat list of named metrics. Every metric carries the norm
//! it was measured in and, if it gates the verdict, a [`Threshold`];
//! `pass` is exactly "every gated metric is admitted by its threshold".
//! Trials are seeded per index, so results do not depend on scheduling.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equations::{mean_momentum_energy, t_map, EquationSpec, Sign, TMapDirection, Trajectory, WickedSign};
use crate::error::{Error, Result};
use crate::gauge::{self, GaugedTrajectory, Recovery};
use crate::integrator::{simulate, IntegratorConfig};
use crate::norms::{self, lq_norm, sobolev_norm, BourgainVariant, SpaceTimeBlock, SpatialNorm};
use crate::random::{trial_rng, Ensemble, Radius};
use crate::spectral::{Complex64, Grid, PeriodicField, Projection};

/// Fixed values standing in for the open exponents `5/4+` and `3/2-`.
pub const S_FIVE_QUARTERS_PLUS: f64 = 1.3;
pub const S_THREE_HALVES_MINUS: f64 = 1.45;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Threshold {
    /// Recorded, never gates.
    Info,
    Below { limit: f64 },
    AtMost { limit: f64 },
    AtLeast { limit: f64 },
    Within { lo: f64, hi: f64 },
}

impl Threshold {
    /// `None` for informational metrics. NaN is never admitted.
    pub fn admits(&self, v: f64) -> Option<bool> {
        match *self {
            Threshold::Info => None,
            Threshold::Below { limit } => Some(v < limit),
            Threshold::AtMost { limit } => Some(v <= limit),
            Threshold::AtLeast { limit } => Some(v >= limit),
            Threshold::Within { lo, hi } => Some(v >= lo && v <= hi),
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Threshold::Info => write!(f, "info"),
            Threshold::Below { limit } => write!(f, "< {limit:e}"),
            Threshold::AtMost { limit } => write!(f, "<= {limit:e}"),
            Threshold::AtLeast { limit } => write!(f, ">= {limit:e}"),
            Threshold::Within { lo, hi } => write!(f, "in [{lo}, {hi}]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    /// How the value was measured, e.g. `"H^1/2, max over t"`.
    pub norm: String,
    pub threshold: Threshold,
}

impl Metric {
    pub fn passes(&self) -> Option<bool> {
        self.threshold.admits(self.value)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub test_id: String,
    pub inputs: BTreeMap<String, serde_json::Value>,
    pub metrics: Vec<Metric>,
    pub findings: BTreeMap<String, String>,
    pub pass: bool,
    pub provenance: Option<String>,
}

impl DiagnosticsReport {
    pub fn new(test_id: impl Into<String>) -> Self {
        Self {
            test_id: test_id.into(),
            inputs: BTreeMap::new(),
            metrics: Vec::new(),
            findings: BTreeMap::new(),
            pass: true,
            provenance: None,
        }
    }

    pub fn input(&mut self, key: &str, value: impl Into<serde_json::Value>) -> &mut Self {
        self.inputs.insert(key.to_string(), value.into());
        self
    }

    pub fn metric(&mut self, name: impl Into<String>, value: f64, norm: &str, threshold: Threshold) -> &mut Self {
        self.metrics.push(Metric {
            name: name.into(),
            value,
            norm: norm.to_string(),
            threshold,
        });
        self.pass = self.evaluate();
        self
    }

    pub fn info(&mut self, name: impl Into<String>, value: f64, norm: &str) -> &mut Self {
        self.metric(name, value, norm, Threshold::Info)
    }

    pub fn finding(&mut self, key: &str, value: impl Into<String>) -> &mut Self {
        self.findings.insert(key.to_string(), value.into());
        self
    }

    pub fn with_provenance(mut self, hash: impl Into<String>) -> Self {
        self.provenance = Some(hash.into());
        self
    }

    /// The verdict recomputed from the metrics.
    pub fn evaluate(&self) -> bool {
        self.metrics.iter().all(|m| m.passes().unwrap_or(true))
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|m| m.name == name).map(|m| m.value)
    }

    pub fn failures(&self) -> Vec<&Metric> {
        self.metrics.iter().filter(|m| m.passes() == Some(false)).collect()
    }

    /// `key = value` lines, annotated with comments, ending in `pass = …`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("test_id = {}\n", self.test_id));
        out.push_str(&format!(
            "provenance = {}\n",
            self.provenance.as_deref().unwrap_or("none")
        ));
        for (k, v) in &self.inputs {
            out.push_str(&format!("input.{k} = {v}\n"));
        }
        for m in &self.metrics {
            out.push_str(&format!("# {}: {}\n", m.norm, m.threshold));
            out.push_str(&format!("{} = {:e}\n", m.name, m.value));
        }
        for (k, v) in &self.findings {
            out.push_str(&format!("finding.{k} = {v}\n"));
        }
        out.push_str(&format!("pass = {}\n", self.pass));
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }
}

/// Several reports with a combined verdict.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Campaign {
    pub reports: Vec<DiagnosticsReport>,
}

impl Campaign {
    pub fn pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.reports {
            out.push_str(&format!("[{}]\n", r.test_id));
            out.push_str(&r.to_text());
            out.push('\n');
        }
        out.push_str(&format!("pass = {}\n", self.pass()));
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// Declared acceptance thresholds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    /// Relative residual of exact identities.
    pub identity_residual: f64,
    /// Absolute drift of `∫u`.
    pub mean_drift: f64,
    /// Admissible drift reduction per halving of `dt`.
    pub conservation_ratio: [f64; 2],
    /// Observed order window for centered-difference residuals.
    pub residual_order: [f64; 2],
    /// Relative change of the gauge residual under grid refinement.
    pub refinement_change: f64,
    /// Minimal order for the matching reduction pair.
    pub reduction_order: f64,
    /// `max / median` of probe ratios.
    pub probe_spread: f64,
    /// Log-log slope of the probe maxima against `N`.
    pub probe_slope: f64,
    /// `max / min` of the continuity ratios over δ.
    pub continuity_spread: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            identity_residual: 1e-9,
            mean_drift: 1e-11,
            conservation_ratio: [11.0, 22.0],
            residual_order: [1.8, 2.2],
            refinement_change: 0.1,
            reduction_order: 2.0,
            probe_spread: 10.0,
            probe_slope: 0.1,
            continuity_spread: 3.0,
        }
    }
}

/// Observed order from errors at two step sizes.
pub fn observed_order(err_coarse: f64, err_fine: f64, dt_coarse: f64, dt_fine: f64) -> f64 {
    (err_coarse / err_fine).ln() / (dt_coarse / dt_fine).ln()
}

fn rel(diff: &PeriodicField, reference: &PeriodicField) -> f64 {
    let r = reference.coeff_norm();
    let d = diff.coeff_norm();
    if r > 0.0 {
        d / r
    } else {
        d
    }
}

fn dt_label(dt: f64) -> String {
    format!("{dt:e}")
}

// ---------------------------------------------------------------- identities

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IdentityStudy {
    pub n: usize,
    pub trials: usize,
    /// Highest wavenumber of the random fields.
    pub band: i64,
    /// H^{1/2} radius of every sample.
    pub radius: f64,
}

impl Default for IdentityStudy {
    fn default() -> Self {
        Self {
            n: 64,
            trials: 100,
            band: 4,
            radius: 1.0,
        }
    }
}

/// Relative residuals of the exact identities for one real field.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IdentityResiduals {
    pub b_identity: f64,
    pub rewrite: f64,
    pub recover_plus: f64,
    pub recover_minus: f64,
    pub exp_derivative: f64,
    pub hilbert_square: f64,
    pub projection_partition: f64,
    pub truncation_tail: f64,
}

impl IdentityResiduals {
    fn fields(&self) -> [(&'static str, f64); 7] {
        [
            ("b_identity", self.b_identity),
            ("rewrite", self.rewrite),
            ("recover_plus", self.recover_plus),
            ("recover_minus", self.recover_minus),
            ("exp_derivative", self.exp_derivative),
            ("hilbert_square", self.hilbert_square),
            ("projection_partition", self.projection_partition),
        ]
    }

    /// Largest of the identity residuals (the truncation tail excluded).
    pub fn max_residual(&self) -> f64 {
        self.fields().iter().map(|f| f.1).fold(0.0, f64::max)
    }

    fn max(&self, other: &Self) -> Self {
        Self {
            b_identity: self.b_identity.max(other.b_identity),
            rewrite: self.rewrite.max(other.rewrite),
            recover_plus: self.recover_plus.max(other.recover_plus),
            recover_minus: self.recover_minus.max(other.recover_minus),
            exp_derivative: self.exp_derivative.max(other.exp_derivative),
            hilbert_square: self.hilbert_square.max(other.hilbert_square),
            projection_partition: self.projection_partition.max(other.projection_partition),
            truncation_tail: self.truncation_tail.max(other.truncation_tail),
        }
    }
}

pub fn identity_residuals(u: &PeriodicField) -> Result<IdentityResiduals> {
    let state = gauge::gauge_transform(u)?;
    let ux = u.derivative();

    // ∂⁻¹(u_x H u_x), computed without the P± split that B uses
    let reference = (&ux * &ux.hilbert()).project(Projection::NonConstant).antiderivative()?;
    let b_identity = rel(&(&gauge::bilinear_b(u, u)? - &reference), &reference);

    let (lhs, rhs) = state.rewrite_check()?;
    let rewrite = rel(&(&lhs - &rhs), &lhs);

    let plus = u.project(Projection::Plus);
    let minus = u.project(Projection::Minus);
    let recover_plus = rel(&(&state.recover(Recovery::Plus) - &plus), &plus);
    let recover_minus = rel(&(&state.recover(Recovery::Minus) - &minus), &minus);

    let q = (u * u).project(Projection::NonConstant);
    let mut exp_derivative: f64 = 0.0;
    let mut tail: f64 = state.truncation_tail;
    for k in [-2, -1, 1, 2] {
        let (e, t) = gauge::gauge_exp_with_tail(&state.f, k);
        tail = tail.max(t);
        let predicted = (&e * &q).scale_complex(Complex64::new(0.0, k as f64));
        let r = sobolev_norm(&(&e.derivative() - &predicted), 0.0) / sobolev_norm(&e, 1.0);
        exp_derivative = exp_derivative.max(r);
    }

    let hh = u.hilbert().hilbert();
    let hilbert_square = rel(&(&hh + &u.project(Projection::NonConstant)), u);

    let parts = &(&plus + &minus) + &u.project(Projection::Mean);
    let projection_partition = rel(&(&parts - u), u);

    Ok(IdentityResiduals {
        b_identity,
        rewrite,
        recover_plus,
        recover_minus,
        exp_derivative,
        hilbert_square,
        projection_partition,
        truncation_tail: tail,
    })
}

pub fn identity_suite(seed: u64, study: &IdentityStudy, th: &Thresholds) -> Result<DiagnosticsReport> {
    let grid = Grid::new(study.n)?;
    let ensemble = Ensemble::real(study.band).with_radius(Radius::Fixed(study.radius));
    let per_trial = (0..study.trials as u64)
        .into_par_iter()
        .map(|i| identity_residuals(&ensemble.sample(grid, &mut trial_rng(seed, i))?))
        .collect::<Result<Vec<_>>>()?;
    let worst = per_trial
        .iter()
        .fold(IdentityResiduals::default(), |acc, r| acc.max(r));

    let mut rep = DiagnosticsReport::new("identity_suite");
    rep.input("seed", seed)
        .input("n", study.n)
        .input("trials", study.trials)
        .input("band", study.band)
        .input("radius_h_half", study.radius);
    for (name, value) in worst.fields() {
        rep.metric(
            format!("{name}_max"),
            value,
            "relative L2, max over trials",
            Threshold::Below {
                limit: th.identity_residual,
            },
        );
    }
    rep.info("truncation_tail_max", worst.truncation_tail, "relative l2 of e^{ikF} beyond the band");
    Ok(rep)
}

// -------------------------------------------------------------- conservation

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConservationStudy {
    pub sign: Sign,
    pub t_end: f64,
    /// Successive halvings, coarsest first.
    pub dts: Vec<f64>,
}

impl Default for ConservationStudy {
    fn default() -> Self {
        Self {
            sign: Sign::Defocusing,
            t_end: 1.0,
            dts: vec![4e-3, 2e-3, 1e-3],
        }
    }
}

/// `max_t |Q(t) - Q(0)|` for the three conserved quantities.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Drifts {
    pub mean: f64,
    pub momentum: f64,
    pub energy: f64,
}

pub fn conservation_drifts(traj: &Trajectory, sign: Sign) -> Result<Drifts> {
    let first = traj.snapshots().first().ok_or(Error::EmptyTrajectory)?;
    let q0 = mean_momentum_energy(first, sign);
    let mut d = Drifts::default();
    for s in traj.snapshots() {
        let q = mean_momentum_energy(s, sign);
        d.mean = d.mean.max((q.mean - q0.mean).abs());
        d.momentum = d.momentum.max((q.momentum - q0.momentum).abs());
        d.energy = d.energy.max((q.energy - q0.energy).abs());
    }
    Ok(d)
}

pub fn check_conservation(u0: &PeriodicField, study: &ConservationStudy, th: &Thresholds) -> Result<DiagnosticsReport> {
    let spec = EquationSpec::Mbo(study.sign);
    let drifts = study
        .dts
        .par_iter()
        .map(|&dt| {
            let traj = simulate(&spec, u0, &IntegratorConfig::new(dt, study.t_end))?;
            conservation_drifts(&traj, study.sign)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rep = DiagnosticsReport::new("conservation");
    rep.input("equation", spec.to_string())
        .input("n", u0.grid().n_modes())
        .input("t_end", study.t_end)
        .input("dts", study.dts.clone());
    for (dt, d) in study.dts.iter().zip(&drifts) {
        let l = dt_label(*dt);
        rep.metric(
            format!("mean_drift@dt={l}"),
            d.mean,
            "absolute, max over t",
            Threshold::Below { limit: th.mean_drift },
        );
        rep.info(format!("momentum_drift@dt={l}"), d.momentum, "absolute, max over t");
        rep.info(format!("energy_drift@dt={l}"), d.energy, "absolute, max over t");
    }
    let [lo, hi] = th.conservation_ratio;
    for i in 1..drifts.len() {
        let (a, b) = (&drifts[i - 1], &drifts[i]);
        let (dta, dtb) = (study.dts[i - 1], study.dts[i]);
        for (name, ca, cb) in [("momentum", a.momentum, b.momentum), ("energy", a.energy, b.energy)] {
            let label = format!("{}->{}", dt_label(dta), dt_label(dtb));
            if ca == 0.0 && cb == 0.0 {
                rep.finding(&format!("{name}_stationary@{label}"), "drift identically zero");
                continue;
            }
            rep.metric(
                format!("{name}_ratio@{label}"),
                ca / cb,
                "drift(coarse) / drift(fine)",
                Threshold::Within { lo, hi },
            );
            rep.info(format!("{name}_order@{label}"), observed_order(ca, cb, dta, dtb), "observed order in dt");
        }
    }
    Ok(rep)
}

// --------------------------------------------------------- gauged residuals

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaugeStudy {
    pub t_end: f64,
    /// Two or more step sizes, coarsest first.
    pub dts: Vec<f64>,
    /// Grid for the spatial saturation check, run at the finest `dt`.
    pub refined_n: usize,
}

impl Default for GaugeStudy {
    fn default() -> Self {
        Self {
            t_end: 0.5,
            dts: vec![1e-3, 5e-4],
            refined_n: 256,
        }
    }
}

/// Residual of the gauged equation at every interior snapshot, for the
/// corrected and the transcribed source term.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResidualProfile {
    pub times: Vec<f64>,
    pub corrected: Vec<f64>,
    pub printed: Vec<f64>,
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

impl ResidualProfile {
    pub fn max_corrected(&self) -> f64 {
        max_of(&self.corrected)
    }

    pub fn max_printed(&self) -> f64 {
        max_of(&self.printed)
    }
}

/// `‖(v(t+dt) - v(t-dt))/2dt - ∂_t v‖_{H^{1/2}}` with `∂_t v` from the gauged
/// equation, at every interior snapshot.
pub fn gauge_residual(gauged: &GaugedTrajectory) -> Result<ResidualProfile> {
    let states = gauged.states();
    if states.len() < 3 {
        return Err(Error::TooFewSnapshots {
            needed: 3,
            got: states.len(),
        });
    }
    let base = gauged.base();
    let dt = base.dt();
    let rows = (1..states.len() - 1)
        .into_par_iter()
        .map(|m| {
            let vt = (&states[m + 1].v - &states[m - 1].v).scale(0.5 / dt);
            let a = sobolev_norm(&(&vt - &states[m].gauged_rhs()?), 0.5);
            let b = sobolev_norm(&(&vt - &states[m].gauged_rhs_as_printed()?), 0.5);
            Ok((base.time(m), a, b))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut p = ResidualProfile::default();
    for (t, a, b) in rows {
        p.times.push(t);
        p.corrected.push(a);
        p.printed.push(b);
    }
    Ok(p)
}

/// `‖(F(t+dt) - F(t-dt))/2dt - F_t(u)‖_{L²}` at every interior snapshot.
pub fn ft_residual(traj: &Trajectory) -> Result<Vec<f64>> {
    if traj.len() < 3 {
        return Err(Error::TooFewSnapshots {
            needed: 3,
            got: traj.len(),
        });
    }
    let fs = traj
        .snapshots()
        .par_iter()
        .map(gauge::primitive_f)
        .collect::<Result<Vec<_>>>()?;
    let dt = traj.dt();
    (1..traj.len() - 1)
        .into_par_iter()
        .map(|m| {
            let ft = (&fs[m + 1] - &fs[m - 1]).scale(0.5 / dt);
            Ok(sobolev_norm(&(&ft - &gauge::f_t_formula(&traj.snapshots()[m])?), 0.0))
        })
        .collect()
}

/// Runs the Wicked-order equation from `u0` at every `dt` (and once on the
/// refined grid) and reports both the gauged-equation and the `F_t`
/// residuals.
pub fn gauge_study(
    u0: &PeriodicField,
    study: &GaugeStudy,
    th: &Thresholds,
) -> Result<(DiagnosticsReport, DiagnosticsReport)> {
    if study.dts.len() < 2 {
        return Err(Error::InvalidParameter("gauge study needs two step sizes".into()));
    }
    let spec = EquationSpec::wicked();
    let fine_dt = *study.dts.last().unwrap();
    let refined = u0.resample(Grid::new(study.refined_n)?);
    let mut jobs: Vec<(PeriodicField, f64)> = study.dts.iter().map(|&dt| (u0.clone(), dt)).collect();
    jobs.push((refined, fine_dt));

    let results = jobs
        .par_iter()
        .map(|(init, dt)| {
            let traj = simulate(&spec, init, &IntegratorConfig::new(*dt, study.t_end))?;
            let ft = ft_residual(&traj)?;
            let gauged = GaugedTrajectory::new(traj)?;
            let profile = gauge_residual(&gauged)?;
            Ok((profile, max_of(&ft), gauged.max_truncation_tail()))
        })
        .collect::<Result<Vec<_>>>()?;
    let (levels, refined_run) = results.split_at(study.dts.len());
    let [lo, hi] = th.residual_order;

    let mut g = DiagnosticsReport::new("gauge_residual");
    g.input("equation", spec.to_string())
        .input("n", u0.grid().n_modes())
        .input("refined_n", study.refined_n)
        .input("t_end", study.t_end)
        .input("dts", study.dts.clone());
    let mut f = DiagnosticsReport::new("ft_residual");
    f.input("equation", spec.to_string())
        .input("n", u0.grid().n_modes())
        .input("t_end", study.t_end)
        .input("dts", study.dts.clone());

    let norm = "H^1/2, max over interior t";
    for (dt, (p, ft, tail)) in study.dts.iter().zip(levels) {
        let l = dt_label(*dt);
        g.info(format!("residual_max@dt={l}"), p.max_corrected(), norm);
        g.info(format!("printed_source_residual_max@dt={l}"), p.max_printed(), norm);
        g.info(format!("truncation_tail_max@dt={l}"), *tail, "relative l2 of e^{±iF} beyond the band");
        f.info(format!("residual_max@dt={l}"), *ft, "L2, max over interior t");
    }
    for i in 1..levels.len() {
        let (dta, dtb) = (study.dts[i - 1], study.dts[i]);
        let label = format!("{}->{}", dt_label(dta), dt_label(dtb));
        g.metric(
            format!("order@{label}"),
            observed_order(levels[i - 1].0.max_corrected(), levels[i].0.max_corrected(), dta, dtb),
            "observed order in dt",
            Threshold::Within { lo, hi },
        );
        g.info(
            format!("printed_source_order@{label}"),
            observed_order(levels[i - 1].0.max_printed(), levels[i].0.max_printed(), dta, dtb),
            "observed order in dt",
        );
        f.metric(
            format!("order@{label}"),
            observed_order(levels[i - 1].1, levels[i].1, dta, dtb),
            "observed order in dt",
            Threshold::Within { lo, hi },
        );
    }
    let coarse_grid = levels.last().unwrap().0.max_corrected();
    let fine_grid = refined_run[0].0.max_corrected();
    g.info(format!("residual_max@n={}", study.refined_n), fine_grid, norm);
    g.metric(
        "refinement_change",
        (fine_grid - coarse_grid).abs() / coarse_grid,
        "relative change of the max residual, N -> refined N",
        Threshold::Below {
            limit: th.refinement_change,
        },
    );
    g.finding("source_term", "corrected (transcribed form reported as printed_source_*)");
    Ok((g, f))
}

// ---------------------------------------------------------- wicked reduction

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReductionStudy {
    pub t_end: f64,
    pub dts: Vec<f64>,
}

impl Default for ReductionStudy {
    fn default() -> Self {
        Self {
            t_end: 1.0,
            dts: vec![0.04, 0.02, 0.01],
        }
    }
}

fn trajectory_mismatch(a: &Trajectory, b: &Trajectory) -> f64 {
    a.snapshots()
        .iter()
        .zip(b.snapshots())
        .map(|(x, y)| sobolev_norm(&(x - y), 0.5))
        .fold(0.0, f64::max)
}

/// Maps solutions of `∂_t u + H∂²u = ∓u²u_x` through the translation map and
/// compares with direct solutions of `∂_t w + H∂²w = ±2P_{≠c}(w²)w_x` from
/// `u0/√2`, for all four sign pairings.
pub fn verify_wicked_reduction(
    u0: &PeriodicField,
    study: &ReductionStudy,
    th: &Thresholds,
) -> Result<DiagnosticsReport> {
    if !u0.is_real() {
        return Err(Error::InvalidParameter("reduction needs a real datum".into()));
    }
    let w0 = u0.scale(std::f64::consts::FRAC_1_SQRT_2);
    let signs = [Sign::Focusing, Sign::Defocusing];
    let wsigns = [WickedSign::Plus, WickedSign::Minus];

    let mut jobs = Vec::new();
    for &dt in &study.dts {
        for s in signs {
            jobs.push((EquationSpec::Mbo(s), dt));
        }
        for w in wsigns {
            jobs.push((EquationSpec::Wicked(w), dt));
        }
    }
    let runs = jobs
        .par_iter()
        .map(|(spec, dt)| {
            let cfg = IntegratorConfig::new(*dt, study.t_end);
            match spec {
                EquationSpec::Mbo(_) => t_map(&simulate(spec, u0, &cfg)?, TMapDirection::Forward),
                _ => simulate(spec, &w0, &cfg),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let find = |spec: EquationSpec, dt: f64| -> &Trajectory {
        let i = jobs.iter().position(|(s, d)| *s == spec && *d == dt).unwrap();
        &runs[i]
    };

    let mut rep = DiagnosticsReport::new("wicked_reduction");
    rep.input("n", u0.grid().n_modes())
        .input("t_end", study.t_end)
        .input("dts", study.dts.clone());
    let mut matching = Vec::new();
    let mut degenerate = true;
    for s in signs {
        for w in wsigns {
            let pair = format!("{s}/{}", if w == WickedSign::Plus { "+" } else { "-" });
            let mism: Vec<f64> = study
                .dts
                .iter()
                .map(|&dt| trajectory_mismatch(find(EquationSpec::Mbo(s), dt), find(EquationSpec::Wicked(w), dt)))
                .collect();
            for (dt, m) in study.dts.iter().zip(&mism) {
                rep.info(format!("mismatch[{pair}]@dt={}", dt_label(*dt)), *m, "H^1/2, max over t");
            }
            degenerate &= mism.iter().all(|&m| m == 0.0);
            let order = (1..mism.len())
                .map(|i| observed_order(mism[i - 1], mism[i], study.dts[i - 1], study.dts[i]))
                .fold(f64::INFINITY, f64::min);
            rep.info(format!("order[{pair}]"), order, "min observed order over dt pairs");
            if order.is_finite() && order >= th.reduction_order {
                matching.push(pair);
            }
        }
    }
    rep.metric(
        "matching_pairs",
        matching.len() as f64,
        "pairs converging at the required order",
        Threshold::Within { lo: 1.0, hi: 1.0 },
    );
    if degenerate {
        rep.finding("degenerate", "all mismatches vanish identically (zero datum)");
    }
    rep.finding(
        "matching_pair",
        if matching.len() == 1 { matching[0].clone() } else { format!("none unique: {matching:?}") },
    );
    rep.finding("wicked_initial_datum", "u0/sqrt(2)");
    Ok(rep)
}

// -------------------------------------------------------------------- probes

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeKind {
    /// `‖v‖_{L⁴_{t,x}} / ‖v‖_{X^{0,3/8}}`
    BourgainL4,
    /// `‖W(t)u₀‖_{L⁴_{t,x}([0,1]×𝕋)} / ‖u₀‖_{L²}`
    Strichartz,
    /// `‖R(u)‖_{H^{5/4+}} / ((1 + ‖u‖⁴_{H^{1/2}})‖u‖_{H^{1/2}})`
    RSmoothing,
    /// `‖e^{iF}‖_{H¹} / (1 + ‖u‖²_{H^{1/2}})`
    ExpH1,
}

impl ProbeKind {
    pub const ALL: [ProbeKind; 4] = [
        ProbeKind::BourgainL4,
        ProbeKind::Strichartz,
        ProbeKind::RSmoothing,
        ProbeKind::ExpH1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProbeKind::BourgainL4 => "bourgain_l4",
            ProbeKind::Strichartz => "strichartz",
            ProbeKind::RSmoothing => "r_smoothing",
            ProbeKind::ExpH1 => "exp_h1",
        }
    }
}

impl fmt::Display for ProbeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProbeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ProbeKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown probe {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeStudy {
    pub trials: usize,
    pub grids: Vec<usize>,
    /// H^{1/2} radius range; each sample draws uniformly from it.
    pub radius: [f64; 2],
}

impl Default for ProbeStudy {
    fn default() -> Self {
        Self {
            trials: 200,
            grids: vec![32, 64, 128],
            radius: [0.5, 2.0],
        }
    }
}

/// One probe sample: the ratio and, for the L⁴ probe, the square-function
/// ratio `‖v‖_{L⁴} / ‖v‖_{L̃⁴}`.
fn probe_sample(kind: ProbeKind, grid: Grid, radius: [f64; 2], rng: &mut impl Rng) -> Result<(f64, Option<f64>)> {
    let band = (grid.n_modes() / 4) as i64;
    let r = Radius::Uniform(radius[0], radius[1]);
    match kind {
        ProbeKind::Strichartz => {
            let u0 = Ensemble::real(band).with_radius(r).sample(grid, rng)?;
            Ok((strichartz_ratio(&u0, (2 * band * band).max(64) as usize), None))
        }
        ProbeKind::BourgainL4 => {
            // superposed free waves with random modulations, tapered to [0,1]
            let parts = (0..3)
                .map(|_| {
                    let f = Ensemble::complex(band).with_radius(r).sample(grid, rng)?;
                    Ok((f, rng.random_range(-20.0..20.0)))
                })
                .collect::<Result<Vec<(PeriodicField, f64)>>>()?;
            let top = (band * band) as f64 + 20.0;
            let m = ((2.0 * top / std::f64::consts::PI).ceil() as usize + 1).max(16);
            let h = 1.0 / (m - 1) as f64;
            let snaps = (0..m)
                .map(|i| {
                    let t = i as f64 * h;
                    parts.iter().fold(PeriodicField::zeros(grid, false), |acc, (f, lam)| {
                        &acc + &f.propagate_free(t).scale_complex(Complex64::from_polar(1.0, -lam * t))
                    })
                })
                .collect();
            let traj = Trajectory::new(grid, 0.0, h, snaps)?;
            let block = SpaceTimeBlock::new(&traj)?;
            let l4 = block.lq_norm(4.0);
            let x = block.xsb_norm(0.0, 0.375, BourgainVariant::X);
            let tapered = Trajectory::new(
                grid,
                0.0,
                h,
                traj.snapshots().iter().zip(block.taper()).map(|(f, w)| f.scale(*w)).collect(),
            )?;
            let tilde = norms::tilde_norm(&tapered, 4.0, SpatialNorm::Lq(4.0));
            Ok((l4 / x, Some(norms::lp_lq_norm(&tapered, 4.0, 4.0) / tilde)))
        }
        ProbeKind::RSmoothing => {
            let u = Ensemble::real(band).with_radius(r).sample(grid, rng)?;
            let state = gauge::gauge_transform(&u)?;
            let n = sobolev_norm(&u, 0.5);
            Ok((sobolev_norm(&state.r, S_FIVE_QUARTERS_PLUS) / ((1.0 + n.powi(4)) * n), None))
        }
        ProbeKind::ExpH1 => {
            let u = Ensemble::real(band).with_radius(r).sample(grid, rng)?;
            let f = gauge::primitive_f(&u)?;
            let n = sobolev_norm(&u, 0.5);
            Ok((sobolev_norm(&gauge::gauge_exp(&f, 1), 1.0) / (1.0 + n * n), None))
        }
    }
}

/// `‖W(t)u₀‖_{L⁴([0,1]×𝕋)} / ‖u₀‖_{L²}` with `steps` trapezoid intervals in t.
pub fn strichartz_ratio(u0: &PeriodicField, steps: usize) -> f64 {
    let h = 1.0 / steps as f64;
    let vals: Vec<f64> = (0..=steps)
        .map(|i| lq_norm(&u0.propagate_free(i as f64 * h), 4.0).powi(4))
        .collect();
    let inner: f64 = vals[1..steps].iter().sum();
    let l4 = (h * (inner + 0.5 * (vals[0] + vals[steps]))).powf(0.25);
    l4 / lq_norm(u0, 2.0)
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

pub fn estimate_probe(kind: ProbeKind, seed: u64, study: &ProbeStudy, th: &Thresholds) -> Result<DiagnosticsReport> {
    let mut rep = DiagnosticsReport::new(format!("probe_{kind}"));
    rep.input("seed", seed)
        .input("trials", study.trials)
        .input("grids", study.grids.clone())
        .input("radius_h_half", study.radius.to_vec())
        .input("band", "N/4");
    if kind == ProbeKind::RSmoothing {
        rep.input("s_five_quarters_plus", S_FIVE_QUARTERS_PLUS);
    }
    let mut log_n = Vec::new();
    let mut log_max = Vec::new();
    for &n in &study.grids {
        let grid = Grid::new(n)?;
        let samples = (0..study.trials as u64)
            .into_par_iter()
            .map(|i| probe_sample(kind, grid, study.radius, &mut trial_rng(seed, ((n as u64) << 32) | i)))
            .collect::<Result<Vec<_>>>()?;
        let mut ratios: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let med = median(&mut ratios);
        rep.info(format!("ratio_max@n={n}"), max, "probe ratio");
        rep.info(format!("ratio_median@n={n}"), med, "probe ratio");
        rep.metric(
            format!("spread@n={n}"),
            max / med,
            "max / median of probe ratios",
            Threshold::AtMost {
                limit: th.probe_spread,
            },
        );
        let sq: Vec<f64> = samples.iter().filter_map(|s| s.1).collect();
        if !sq.is_empty() {
            rep.info(
                format!("square_function_ratio_max@n={n}"),
                sq.iter().copied().fold(0.0, f64::max),
                "L4 / tilde L4",
            );
        }
        log_n.push((n as f64).ln());
        log_max.push(max.ln());
    }
    if log_n.len() >= 2 {
        rep.metric(
            "growth_slope",
            fit_slope(&log_n, &log_max),
            "least-squares slope of log max ratio vs log N",
            Threshold::Below { limit: th.probe_slope },
        );
    }
    Ok(rep)
}

// ---------------------------------------------------------------- continuity

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContinuityStudy {
    pub t_end: f64,
    pub dt: f64,
    pub deltas: Vec<f64>,
    /// Seed of the fixed perturbation direction.
    pub direction_seed: u64,
}

impl Default for ContinuityStudy {
    fn default() -> Self {
        Self {
            t_end: 1.0,
            dt: 1e-3,
            deltas: vec![1e-2, 1e-3, 1e-4],
            direction_seed: 7,
        }
    }
}

/// Fixed real direction with `‖g‖_{H^{1/2}} = 1`.
pub fn continuity_direction(grid: Grid, seed: u64) -> Result<PeriodicField> {
    let band = grid.max_wavenumber().min(8);
    Ensemble::real(band)
        .with_radius(Radius::Fixed(1.0))
        .sample(grid, &mut trial_rng(seed, 0))
}

pub fn data_continuity(u0: &PeriodicField, sign: Sign, study: &ContinuityStudy, th: &Thresholds) -> Result<DiagnosticsReport> {
    if sign == Sign::Focusing {
        return Err(Error::InvalidParameter(
            "continuity probe is defined for the defocusing sign only".into(),
        ));
    }
    let spec = EquationSpec::Mbo(sign);
    let cfg = IntegratorConfig::new(study.dt, study.t_end);
    let g = continuity_direction(u0.grid(), study.direction_seed)?;
    let mut inits = vec![u0.clone()];
    inits.extend(study.deltas.iter().map(|&d| u0 + &g.scale(d)));
    let runs = inits
        .par_iter()
        .map(|init| simulate(&spec, init, &cfg))
        .collect::<Result<Vec<_>>>()?;

    let mut rep = DiagnosticsReport::new("data_continuity");
    rep.input("equation", spec.to_string())
        .input("n", u0.grid().n_modes())
        .input("t_end", study.t_end)
        .input("dt", study.dt)
        .input("deltas", study.deltas.clone())
        .input("direction_seed", study.direction_seed);
    let mut ratios = Vec::new();
    for (delta, run) in study.deltas.iter().zip(&runs[1..]) {
        let diff = trajectory_mismatch(run, &runs[0]);
        let ratio = if *delta == 0.0 { 0.0 } else { diff / delta };
        rep.info(format!("ratio@delta={}", dt_label(*delta)), ratio, "sup_t H^1/2 difference / delta");
        ratios.push(ratio);
    }
    if !ratios.is_empty() {
        let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        rep.metric(
            "ratio_spread",
            max / min,
            "max / min of the ratios over delta",
            Threshold::AtMost {
                limit: th.continuity_spread,
            },
        );
    }
    Ok(rep)
}
