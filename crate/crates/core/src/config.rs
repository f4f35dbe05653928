//! Run configuration for the `mbo-gauge` binary.
//!
//! A config is a TOML document. Every table rejects unknown keys and every
//! key has a default, so an empty file is a valid config. The provenance
//! hash is the SHA-256 of the *canonical* text: the fully defaulted config
//! re-serialized, so two files that differ only in layout, comments or
//! spelled-out defaults hash identically.
//!
//! ```toml
//! [equation]
//! kind = "mbo"          # mbo | wicked | bo | linear
//! sign = "defocusing"   # mbo: focusing | defocusing; wicked: plus | minus
//!
//! [grid]
//! n = 128
//!
//! [initial]
//! preset = "cosine 1.0 1"
//!
//! [integrator]
//! dt = 1e-3
//! t_end = 1.0
//! snapshot_stride = 10
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::equations::{EquationSpec, Sign, WickedSign};
use crate::error::{Error, Result};
use crate::integrator::IntegratorConfig;
use crate::norms::NormRequest;
use crate::random::{trial_rng, Ensemble};
use crate::spectral::{Grid, PeriodicField};
use crate::verify::{
    self, Campaign, ConservationStudy, ContinuityStudy, DiagnosticsReport, GaugeStudy, IdentityStudy, ProbeKind,
    ProbeStudy, ReductionStudy, Thresholds,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EquationKind {
    #[default]
    Mbo,
    Wicked,
    Bo,
    Linear,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EquationConfig {
    pub kind: EquationKind,
    /// Only meaningful for `mbo` and `wicked`.
    pub sign: Option<String>,
}

impl Default for EquationConfig {
    fn default() -> Self {
        Self {
            kind: EquationKind::Mbo,
            sign: None,
        }
    }
}

impl EquationConfig {
    pub fn spec(&self) -> Result<EquationSpec> {
        let sign = self.sign.as_deref();
        Ok(match self.kind {
            EquationKind::Mbo => EquationSpec::Mbo(
                sign.unwrap_or("defocusing")
                    .parse()
                    .map_err(|_| Error::Config(format!("mbo sign must be focusing|defocusing, got {sign:?}")))?,
            ),
            EquationKind::Wicked => EquationSpec::Wicked(match sign.unwrap_or("plus") {
                "plus" | "+" => WickedSign::Plus,
                "minus" | "-" => WickedSign::Minus,
                other => return Err(Error::Config(format!("wicked sign must be plus|minus, got {other:?}"))),
            }),
            EquationKind::Bo | EquationKind::Linear if sign.is_some() => {
                return Err(Error::Config(format!("{:?} takes no sign", self.kind).to_lowercase()))
            }
            EquationKind::Bo => EquationSpec::Bo,
            EquationKind::Linear => EquationSpec::Linear,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub n: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n: 128 }
    }
}

/// Named initial data.
#[derive(Clone, Debug, PartialEq)]
pub enum Preset {
    Zero,
    /// `amp·cos(kx)`
    Cosine { amp: f64, k: i64 },
    /// `a1·cos(k1 x) + a2·cos(k2 x)`
    TwoMode { a1: f64, k1: i64, a2: f64, k2: i64 },
    /// Real Gaussian field with `⟨k⟩^{-decay}` spectrum on `|k| ≤ N/8`.
    Random { seed: u64, decay: f64 },
}

impl Preset {
    pub fn build(&self, grid: Grid) -> Result<PeriodicField> {
        match *self {
            Preset::Zero => Ok(PeriodicField::zeros(grid, true)),
            Preset::Cosine { amp, k } => PeriodicField::cosine(grid, amp, k),
            Preset::TwoMode { a1, k1, a2, k2 } => {
                Ok(&PeriodicField::cosine(grid, a1, k1)? + &PeriodicField::cosine(grid, a2, k2)?)
            }
            Preset::Random { seed, decay } => {
                let band = (grid.n_modes() / 8).max(1) as i64;
                Ensemble::real(band).with_decay(decay).sample(grid, &mut trial_rng(seed, 0))
            }
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let words: Vec<&str> = s.split_whitespace().collect();
        let bad = || Error::Config(format!("bad initial preset {s:?}"));
        let f = |w: &str| w.parse::<f64>().map_err(|_| bad());
        let i = |w: &str| w.parse::<i64>().map_err(|_| bad());
        match words.as_slice() {
            ["zero"] => Ok(Preset::Zero),
            ["cosine", amp, k] => Ok(Preset::Cosine { amp: f(amp)?, k: i(k)? }),
            ["two-mode", a1, k1, a2, k2] => Ok(Preset::TwoMode {
                a1: f(a1)?,
                k1: i(k1)?,
                a2: f(a2)?,
                k2: i(k2)?,
            }),
            ["random", seed, decay] => Ok(Preset::Random {
                seed: seed.parse().map_err(|_| bad())?,
                decay: f(decay)?,
            }),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::Zero => f.write_str("zero"),
            Preset::Cosine { amp, k } => write!(f, "cosine {amp} {k}"),
            Preset::TwoMode { a1, k1, a2, k2 } => write!(f, "two-mode {a1} {k1} {a2} {k2}"),
            Preset::Random { seed, decay } => write!(f, "random {seed} {decay}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialConfig {
    pub preset: String,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            preset: "cosine 1.0 1".into(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Trajectory (simulate) or report (verify) path; `--out` overrides.
    pub path: Option<String>,
    /// Also write the last snapshot as `k,re,im` CSV here.
    pub snapshot_csv: Option<String>,
}

/// `norms` command: which trajectory, which norms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormsConfig {
    /// Trajectory to read; falls back to `output.path`.
    pub trajectory: Option<String>,
    pub sobolev: Vec<f64>,
    pub lebesgue: Vec<f64>,
    pub bourgain: Vec<[f64; 2]>,
    pub y: Vec<f64>,
    pub windows: usize,
}

impl Default for NormsConfig {
    fn default() -> Self {
        let r = NormRequest::default();
        Self {
            trajectory: None,
            sobolev: r.sobolev,
            lebesgue: r.lebesgue,
            bourgain: r.bourgain,
            y: r.y,
            windows: r.windows,
        }
    }
}

impl NormsConfig {
    pub fn request(&self) -> NormRequest {
        NormRequest {
            sobolev: self.sobolev.clone(),
            lebesgue: self.lebesgue.clone(),
            bourgain: self.bourgain.clone(),
            y: self.y.clone(),
            windows: self.windows,
        }
    }
}

/// Default datum of a study that runs from a preset.
pub trait PresetDefault {
    const PRESET: &'static str;
}

impl PresetDefault for ConservationStudy {
    const PRESET: &'static str = "cosine 1.0 1";
}

impl PresetDefault for GaugeStudy {
    const PRESET: &'static str = "cosine 0.5 1";
}

impl PresetDefault for ReductionStudy {
    const PRESET: &'static str = "two-mode 0.4 1 0.2 2";
}

impl PresetDefault for ContinuityStudy {
    const PRESET: &'static str = "cosine 1.0 1";
}

/// A study that runs from a preset datum on its own grid. The study
/// parameters sit in a nested `study` table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound(deserialize = "S: Deserialize<'de> + Default + PresetDefault"))]
pub struct Seeded<S> {
    pub n: usize,
    pub preset: String,
    pub study: S,
}

impl<S: Default + PresetDefault> Default for Seeded<S> {
    fn default() -> Self {
        Self {
            n: 128,
            preset: S::PRESET.to_string(),
            study: S::default(),
        }
    }
}

impl<S> Seeded<S> {
    pub fn datum(&self) -> Result<PeriodicField> {
        self.preset.parse::<Preset>()?.build(Grid::new(self.n)?)
    }
}

/// Which suites `all` runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteToggles {
    pub identities: bool,
    pub conservation: bool,
    pub gauge: bool,
    pub wicked: bool,
    pub probes: bool,
    pub continuity: bool,
}

impl Default for SuiteToggles {
    fn default() -> Self {
        Self {
            identities: true,
            conservation: true,
            gauge: true,
            wicked: true,
            probes: true,
            continuity: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub seed: u64,
    pub enabled: SuiteToggles,
    pub identities: IdentityStudy,
    pub conservation: Seeded<ConservationStudy>,
    pub gauge: Seeded<GaugeStudy>,
    pub wicked: Seeded<ReductionStudy>,
    pub probes: ProbeStudy,
    pub continuity: Seeded<ContinuityStudy>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            enabled: SuiteToggles::default(),
            identities: IdentityStudy::default(),
            conservation: Seeded::default(),
            gauge: Seeded::default(),
            wicked: Seeded::default(),
            probes: ProbeStudy::default(),
            continuity: Seeded::default(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub equation: EquationConfig,
    pub grid: GridConfig,
    pub initial: InitialConfig,
    pub integrator: IntegratorConfig,
    pub output: OutputConfig,
    pub verify: VerifyConfig,
    pub norms: NormsConfig,
    pub thresholds: Thresholds,
}

/// The suites `verify` accepts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Identities,
    Conservation,
    Gauge,
    Wicked,
    Probes,
    Continuity,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 7] = ["identities", "conservation", "gauge", "wicked", "probes", "continuity", "all"];
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "identities" => Suite::Identities,
            "conservation" => Suite::Conservation,
            "gauge" => Suite::Gauge,
            "wicked" => Suite::Wicked,
            "probes" => Suite::Probes,
            "continuity" => Suite::Continuity,
            "all" => Suite::All,
            _ => {
                return Err(Error::Config(format!(
                    "unknown suite {s:?} (expected one of {})",
                    Self::NAMES.join(", ")
                )))
            }
        })
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Checks the parts that do not depend on which command runs.
    pub fn validate(&self) -> Result<()> {
        self.equation.spec()?;
        Grid::new(self.grid.n)?;
        self.initial.preset.parse::<Preset>()?;
        self.integrator.n_steps()?;
        for p in [&self.verify.conservation.preset, &self.verify.gauge.preset, &self.verify.wicked.preset, &self.verify.continuity.preset] {
            p.parse::<Preset>()?;
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.n)
    }

    pub fn initial_datum(&self) -> Result<PeriodicField> {
        self.initial.preset.parse::<Preset>()?.build(self.grid()?)
    }

    /// `--seed`: the verification seed and, for a `random` preset, the
    /// datum's seed. Applied before hashing, so it shows in provenance.
    pub fn override_seed(&mut self, seed: u64) -> Result<()> {
        self.verify.seed = seed;
        if let Preset::Random { decay, .. } = self.initial.preset.parse()? {
            self.initial.preset = Preset::Random { seed, decay }.to_string();
        }
        Ok(())
    }

    /// Fully defaulted config as TOML.
    pub fn canonical_text(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of [`Self::canonical_text`].
    pub fn provenance(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_text().as_bytes()))
    }

    /// Runs one suite (or all enabled ones) and stamps every report with
    /// the provenance hash.
    pub fn run_suite(&self, suite: Suite) -> Result<Campaign> {
        let v = &self.verify;
        let th = &self.thresholds;
        let wanted = |s: Suite, enabled: bool| suite == s || (suite == Suite::All && enabled);
        let mut reports: Vec<DiagnosticsReport> = Vec::new();
        if wanted(Suite::Identities, v.enabled.identities) {
            reports.push(verify::identity_suite(v.seed, &v.identities, th)?);
        }
        if wanted(Suite::Conservation, v.enabled.conservation) {
            let c = &v.conservation;
            reports.push(verify::check_conservation(&c.datum()?, &c.study, th)?);
        }
        if wanted(Suite::Gauge, v.enabled.gauge) {
            let (g, ft) = verify::gauge_study(&v.gauge.datum()?, &v.gauge.study, th)?;
            reports.push(g);
            reports.push(ft);
        }
        if wanted(Suite::Wicked, v.enabled.wicked) {
            reports.push(verify::verify_wicked_reduction(&v.wicked.datum()?, &v.wicked.study, th)?);
        }
        if wanted(Suite::Probes, v.enabled.probes) {
            for kind in ProbeKind::ALL {
                reports.push(verify::estimate_probe(kind, v.seed, &v.probes, th)?);
            }
        }
        if wanted(Suite::Continuity, v.enabled.continuity) {
            let c = &v.continuity;
            let sign = match self.equation.spec()? {
                EquationSpec::Mbo(s) => s,
                _ => Sign::Defocusing,
            };
            reports.push(verify::data_continuity(&c.datum()?, sign, &c.study, th)?);
        }
        let hash = self.provenance();
        Ok(Campaign {
            reports: reports.into_iter().map(|r| r.with_provenance(hash.clone())).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_default() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_keys_rejected_at_every_level() {
        for text in [
            "bogus = 1",
            "[grid]\nn = 64\nm = 3",
            "[integrator]\nsteps = 3",
            "[verify.conservation]\nfoo = 1",
            "[verify.conservation.study]\nn = 64",
            "[verify.probes]\ntrials = 3\nextra = true",
            "[thresholds]\nwhatever = 1.0",
            "[verify.enabled]\nnothing = true",
        ] {
            assert!(RunConfig::parse(text).is_err(), "{text:?} accepted");
        }
    }

    #[test]
    fn hash_ignores_layout_and_spelled_defaults() {
        let a = RunConfig::parse("[grid]\nn = 64\n").unwrap();
        let b = RunConfig::parse("# comment\n[grid]\n  n=64\n[integrator]\ndt = 0.001\n").unwrap();
        assert_eq!(a.provenance(), b.provenance());
        let c = RunConfig::parse("[grid]\nn = 32\n").unwrap();
        assert_ne!(a.provenance(), c.provenance());
        assert_eq!(a.provenance().len(), 64);
        // canonical text round-trips
        assert_eq!(RunConfig::parse(&a.canonical_text()).unwrap(), a);
    }

    #[test]
    fn presets_parse_and_build() {
        let g = Grid::new(32).unwrap();
        for s in ["zero", "cosine 1.0 1", "two-mode 0.4 1 0.2 2", "random 3 1.5"] {
            let p: Preset = s.parse().unwrap();
            assert_eq!(p.to_string().parse::<Preset>().unwrap(), p);
            assert!(p.build(g).unwrap().is_real());
        }
        let two = "two-mode 0.4 1 0.2 2".parse::<Preset>().unwrap().build(g).unwrap();
        assert!((two.coeff(2).re - 0.1).abs() < 1e-15);
        for s in ["", "cosine", "cosine x 1", "sine 1 1", "random -1 1"] {
            assert!(s.parse::<Preset>().is_err(), "{s:?}");
        }
    }

    #[test]
    fn equation_signs() {
        let p = |t: &str| RunConfig::parse(t).map(|c| c.equation.spec().unwrap());
        assert_eq!(p("[equation]\nkind = \"mbo\"\nsign = \"focusing\"").unwrap(), EquationSpec::Mbo(Sign::Focusing));
        assert_eq!(
            p("[equation]\nkind = \"wicked\"\nsign = \"minus\"").unwrap(),
            EquationSpec::Wicked(WickedSign::Minus)
        );
        assert!(p("[equation]\nkind = \"mbo\"\nsign = \"plus\"").is_err());
        assert!(p("[equation]\nkind = \"kdv\"").is_err());
        assert_eq!(p("[equation]\nkind = \"bo\"").unwrap(), EquationSpec::Bo);
        assert_eq!(p("").unwrap(), EquationSpec::Mbo(Sign::Defocusing));
        assert!(p("[equation]\nkind = \"bo\"\nsign = \"plus\"").is_err());
    }

    #[test]
    fn seed_override() {
        let mut cfg = RunConfig::parse("[initial]\npreset = \"random 3 1.5\"").unwrap();
        let before = cfg.provenance();
        cfg.override_seed(9).unwrap();
        assert_eq!(cfg.verify.seed, 9);
        assert_eq!(cfg.initial.preset, "random 9 1.5");
        assert_ne!(cfg.provenance(), before);
    }

    #[test]
    fn suites() {
        assert_eq!("all".parse::<Suite>().unwrap(), Suite::All);
        assert!("everything".parse::<Suite>().is_err());
    }

    #[test]
    fn identities_suite_runs_and_is_stamped() {
        let mut cfg = RunConfig::default();
        cfg.verify.identities.trials = 3;
        let c = cfg.run_suite(Suite::Identities).unwrap();
        assert_eq!(c.reports.len(), 1);
        assert!(c.pass());
        assert_eq!(c.reports[0].provenance.as_deref(), Some(cfg.provenance().as_str()));
    }
}
