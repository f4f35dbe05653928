use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mbo_gauge::config::{RunConfig, Suite};
use mbo_gauge::equations::{EquationSpec, Sign, Trajectory};
use mbo_gauge::integrator::simulate;
use mbo_gauge::io;
use mbo_gauge::norms::{lq_norm, norm_table, sobolev_norm};
use mbo_gauge::verify::{conservation_drifts, DiagnosticsReport};
use mbo_gauge::Error;

/// Exit codes besides 0 (success / all pass) and 2 (usage, from clap).
const EXIT_FAIL: u8 = 1;
const EXIT_BLOWUP: u8 = 3;
const EXIT_ERROR: u8 = 4;

#[derive(Parser)]
#[command(name = "mbo-gauge", version, about = "Simulate and verify the periodic modified Benjamin-Ono equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// simulate: trajectory path (overrides `output.path`); verify: report path; norms: CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `verify.seed` (and the seed of a `random` preset).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the configured equation and write a trajectory plus summary.
    Simulate(Common),
    /// Run a verification suite; exit status 0 iff every report passes.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "all", value_parser = Suite::NAMES)]
        suite: String,
    },
    /// Evaluate norms of a stored trajectory as CSV.
    Norms(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let result = match cli.command {
        Command::Simulate(c) => load(&c).and_then(|cfg| cmd_simulate(&cfg, c.out.as_deref())),
        Command::Verify { common, suite } => {
            load(&common).and_then(|cfg| cmd_verify(&cfg, suite.parse()?, common.out.as_deref()))
        }
        Command::Norms(c) => load(&c).and_then(|cfg| cmd_norms(&cfg, c.out.as_deref())),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("MBO_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("MBO_THREADS must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn load(c: &Common) -> mbo_gauge::Result<RunConfig> {
    let mut cfg = RunConfig::load(&c.config)?;
    if let Some(seed) = c.seed {
        cfg.override_seed(seed)?;
    }
    Ok(cfg)
}

fn out_path(cfg: &RunConfig, out: Option<&Path>) -> Option<PathBuf> {
    out.map(Path::to_path_buf).or_else(|| cfg.output.path.as_ref().map(PathBuf::from))
}

fn summary(cfg: &RunConfig, spec: EquationSpec, traj: &Trajectory) -> mbo_gauge::Result<DiagnosticsReport> {
    let mut r = DiagnosticsReport::new("simulate");
    r.input("equation", spec.to_string())
        .input("n", cfg.grid.n)
        .input("preset", cfg.initial.preset.clone())
        .input("dt", cfg.integrator.dt)
        .input("t_end", cfg.integrator.t_end)
        .input("snapshot_stride", cfg.integrator.snapshot_stride)
        .input("snapshots", traj.len());
    let last = traj.last().ok_or(Error::EmptyTrajectory)?;
    r.info("final_time", traj.time(traj.len() - 1), "t")
        .info("final_l2", sobolev_norm(last, 0.0), "H^0")
        .info("final_h_half", sobolev_norm(last, 0.5), "H^1/2")
        .info("final_sup", lq_norm(last, f64::INFINITY), "L^inf");
    if traj.is_real() {
        let sign = match spec {
            EquationSpec::Mbo(s) => Some(s),
            _ => None,
        };
        let d = conservation_drifts(traj, sign.unwrap_or(Sign::Defocusing))?;
        r.info("mean_drift", d.mean, "|∫u(t) - ∫u(0)|, max over t")
            .info("momentum_drift", d.momentum, "|∫u²(t) - ∫u²(0)|, max over t");
        if sign.is_some() {
            r.info("energy_drift", d.energy, "|E(t) - E(0)|, max over t");
        }
    }
    Ok(r.with_provenance(cfg.provenance()))
}

fn cmd_simulate(cfg: &RunConfig, out: Option<&Path>) -> mbo_gauge::Result<u8> {
    let spec = cfg.equation.spec()?;
    let u0 = cfg.initial_datum()?;
    let path = out_path(cfg, out).unwrap_or_else(|| PathBuf::from("trajectory.mbot"));
    if path.extension().is_some_and(|e| e == "txt" || e == "json") {
        return Err(Error::Config(format!(
            "trajectory path {} would collide with its summary report",
            path.display()
        )));
    }
    let (traj, stopped) = match simulate(&spec, &u0, &cfg.integrator) {
        Ok(t) => (t, None),
        Err(Error::BlowUp {
            time,
            max_abs,
            threshold,
            partial,
        }) => {
            eprintln!("blow-up at t = {time}: max|u| = {max_abs:e} > {threshold:e}; writing partial trajectory");
            (*partial, Some(time))
        }
        Err(e) => return Err(e),
    };
    io::save_trajectory(&path, &traj, stopped)?;
    let mut report = summary(cfg, spec, &traj)?;
    if let Some(t) = stopped {
        report.finding("blowup", format!("stopped at t = {t}"));
        report.pass = false;
    }
    if let (Some(csv), Some(last)) = (&cfg.output.snapshot_csv, traj.last()) {
        let csv = PathBuf::from(csv);
        std::fs::write(&csv, io::snapshot_csv(last)).map_err(|source| Error::Io { path: csv, source })?;
    }
    let text = report.to_text();
    io::write_report_pair(&path.with_extension("txt"), &text, &report.to_json())?;
    print!("{text}");
    Ok(if stopped.is_some() { EXIT_BLOWUP } else { 0 })
}

fn cmd_verify(cfg: &RunConfig, suite: Suite, out: Option<&Path>) -> mbo_gauge::Result<u8> {
    let campaign = cfg.run_suite(suite)?;
    let text = campaign.to_text();
    // only --out: output.path names the trajectory
    if let Some(path) = out {
        io::write_report_pair(path, &text, &campaign.to_json())?;
    }
    print!("{text}");
    Ok(if campaign.pass() { 0 } else { EXIT_FAIL })
}

fn cmd_norms(cfg: &RunConfig, out: Option<&Path>) -> mbo_gauge::Result<u8> {
    let source = cfg
        .norms
        .trajectory
        .as_ref()
        .or(cfg.output.path.as_ref())
        .ok_or_else(|| Error::Config("norms needs `norms.trajectory` or `output.path`".into()))?;
    let stored = io::load_trajectory(Path::new(source))?;
    if let Some(t) = stored.truncated_at {
        eprintln!("note: trajectory was truncated at t = {t}");
    }
    let csv = io::norm_csv(&norm_table(&stored.trajectory, &cfg.norms.request())?);
    match out {
        Some(p) => std::fs::write(p, csv).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        })?,
        None => print!("{csv}"),
    }
    Ok(0)
}
