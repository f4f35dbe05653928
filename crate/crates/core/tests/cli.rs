//! End-to-end runs of the `mbo-gauge` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mbo_gauge::config::RunConfig;
use mbo_gauge::equations::{EquationSpec, Sign};
use mbo_gauge::integrator::{simulate, IntegratorConfig};
use mbo_gauge::io;
use mbo_gauge::norms::{BourgainVariant, SpaceTimeBlock};
use mbo_gauge::verify::DiagnosticsReport;
use mbo_gauge::{Grid, PeriodicField};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mbo-gauge"))
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.toml");
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str], config: &Path) -> Output {
    bin().args(args).arg("--config").arg(config).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn simulate_zero_field_t0_writes_one_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("z.mbot");
    let cfg = write_config(dir.path(), "[initial]\npreset = \"zero\"\n[integrator]\nt_end = 0.0\n");
    let o = bin()
        .args(["simulate", "--out", out.to_str().unwrap(), "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(o.status.success(), "{o:?}");
    let back = io::load_trajectory(&out).unwrap();
    assert_eq!(back.trajectory.len(), 1);
    assert!(back.trajectory.snapshots()[0].coeffs().iter().all(|c| c.norm() == 0.0));
    assert_eq!(std::fs::metadata(&out).unwrap().len() as usize, io::HEADER_LEN + 128 * 16);
    assert!(dir.path().join("z.txt").exists() && dir.path().join("z.json").exists());
}

#[test]
fn simulate_counts_snapshots_and_round_trips_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let text = "[equation]\nkind = \"mbo\"\nsign = \"defocusing\"\n[grid]\nn = 64\n\
                [initial]\npreset = \"cosine 1.0 1\"\n\
                [integrator]\ndt = 2e-3\nt_end = 0.4\nsnapshot_stride = 5\n\
                [output]\npath = \"run.mbot\"\nsnapshot_csv = \"last.csv\"\n";
    let cfg = write_config(dir.path(), text);
    let o = bin().current_dir(dir.path()).args(["simulate", "--config", "run.toml"]).output().unwrap();
    assert!(o.status.success(), "{o:?}");
    let back = io::load_trajectory(&dir.path().join("run.mbot")).unwrap();
    assert_eq!(back.trajectory.len(), 41); // T/(dt·stride) + 1
    assert_eq!(back.truncated_at, None);

    let parsed = RunConfig::load(&cfg).unwrap();
    let mem = simulate(
        &EquationSpec::Mbo(Sign::Defocusing),
        &PeriodicField::cosine(Grid::new(64).unwrap(), 1.0, 1).unwrap(),
        &parsed.integrator,
    )
    .unwrap();
    assert_eq!(back.trajectory, mem);
    assert_eq!(std::fs::read(dir.path().join("run.mbot")).unwrap(), io::encode_trajectory(&mem, None));

    let csv = std::fs::read_to_string(dir.path().join("last.csv")).unwrap();
    assert_eq!(io::parse_snapshot_csv(&csv, true).unwrap(), *mem.last().unwrap());

    let summary = std::fs::read_to_string(dir.path().join("run.txt")).unwrap();
    assert!(summary.ends_with("pass = true\n"));
    assert!(summary.contains(&format!("provenance = {}", parsed.provenance())));
    let json = DiagnosticsReport::from_json(&std::fs::read_to_string(dir.path().join("run.json")).unwrap()).unwrap();
    assert_eq!(json.to_text(), summary);
    assert!(json.get("energy_drift").unwrap() < 1e-10);
}

#[test]
fn verify_identities_passes_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let report = dir.path().join("rep.txt");
    let go = || {
        let o = bin()
            .args(["verify", "--suite", "identities", "--seed", "1", "--out", report.to_str().unwrap()])
            .arg("--config")
            .arg(&cfg)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{o:?}");
        (stdout(&o), std::fs::read_to_string(&report).unwrap())
    };
    let (a, file_a) = go();
    let (b, file_b) = go();
    assert_eq!(a, b);
    assert_eq!(file_a, file_b);
    assert_eq!(a, file_a);
    assert!(a.starts_with("[identity_suite]\n"));
    assert!(a.ends_with("pass = true\n"));
    let mirror: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("rep.json")).unwrap()).unwrap();
    assert_eq!(mirror["reports"][0]["test_id"], "identity_suite");
    assert_eq!(mirror["reports"][0]["pass"], true);
}

#[test]
fn seed_changes_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[verify.identities]\ntrials = 2\n");
    let hash = |seed: &str| {
        let o = run(&["verify", "--suite", "identities", "--seed", seed], &cfg);
        stdout(&o).lines().find(|l| l.starts_with("provenance = ")).unwrap().to_string()
    };
    assert_eq!(hash("3"), hash("3"));
    assert_ne!(hash("3"), hash("4"));
}

#[test]
fn verify_exit_status_reflects_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[verify.identities]\ntrials = 2\n[thresholds]\nidentity_residual = 1e-30\n");
    let o = run(&["verify", "--suite", "identities"], &cfg);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).ends_with("pass = false\n"));
}

#[test]
fn usage_and_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let o = run(&["verify", "--suite", "everything"], &cfg);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("everything"));

    let bad = write_config(dir.path(), "[grid]\nn = 64\ncolour = \"blue\"\n");
    let o = run(&["simulate"], &bad);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));

    let o = bin().args(["simulate"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2), "missing --config");

    let o = bin().env("MBO_THREADS", "zero").args(["verify", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn threads_variable_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[verify.identities]\ntrials = 4\n");
    let a = bin().env("MBO_THREADS", "1").args(["verify", "--suite", "identities", "--config"]).arg(&cfg).output().unwrap();
    let b = bin().env("MBO_THREADS", "3").args(["verify", "--suite", "identities", "--config"]).arg(&cfg).output().unwrap();
    assert!(a.status.success() && b.status.success());
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn blow_up_flushes_partial_trajectory_with_marker() {
    let dir = tempfile::tempdir().unwrap();
    let text = "[equation]\nsign = \"focusing\"\n[grid]\nn = 32\n[initial]\npreset = \"cosine 1.0 1\"\n\
                [integrator]\ndt = 1e-2\nt_end = 1.0\nblowup_threshold = 0.5\n[output]\npath = \"b.mbot\"\n";
    write_config(dir.path(), text);
    let o = bin().current_dir(dir.path()).args(["simulate", "--config", "run.toml"]).output().unwrap();
    assert_eq!(o.status.code(), Some(3), "{o:?}");
    let back = io::load_trajectory(&dir.path().join("b.mbot")).unwrap();
    let t = back.truncated_at.expect("truncation marker");
    assert!(t < 1.0);
    assert!(!back.trajectory.is_empty());
    let summary = std::fs::read_to_string(dir.path().join("b.txt")).unwrap();
    assert!(summary.contains("finding.blowup") && summary.ends_with("pass = false\n"));
}

fn norms_output(dir: &Path, sim: &str, norms: &str) -> Vec<Vec<String>> {
    write_config(dir, &format!("{sim}\n[output]\npath = \"t.mbot\"\n[norms]\n{norms}\n"));
    let o = bin().current_dir(dir).args(["simulate", "--config", "run.toml"]).output().unwrap();
    assert!(o.status.success(), "{o:?}");
    let o = bin().current_dir(dir).args(["norms", "--config", "run.toml"]).output().unwrap();
    assert!(o.status.success(), "{o:?}");
    let mut reader = csv::Reader::from_reader(o.stdout.as_slice());
    assert_eq!(reader.headers().unwrap(), vec!["scope", "index", "t_start", "t_end", "norm", "value"]);
    reader
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn norms_of_zero_trajectory_vanish() {
    let dir = tempfile::tempdir().unwrap();
    let rows = norms_output(
        dir.path(),
        "[initial]\npreset = \"zero\"\n[integrator]\ndt = 0.01\nt_end = 0.1",
        "sobolev = [0, 1]\nlebesgue = [2, inf]\ny = [0.5]",
    );
    assert_eq!(rows.len(), 11 * 4 + 2);
    assert!(rows.iter().all(|r| r[5] == "0"), "{rows:?}");
}

#[test]
fn norms_of_free_mode_are_constant() {
    let dir = tempfile::tempdir().unwrap();
    let rows = norms_output(
        dir.path(),
        "[equation]\nkind = \"linear\"\n[grid]\nn = 32\n[initial]\npreset = \"cosine 1.0 3\"\n[integrator]\ndt = 0.01\nt_end = 0.5",
        "sobolev = [0.5, 2]\nlebesgue = []\nbourgain = []",
    );
    assert_eq!(rows.len(), 51 * 2);
    for r in rows {
        let s: f64 = r[4].trim_start_matches("H^").parse().unwrap();
        // cos 3x = (e^{3ix} + e^{-3ix})/2
        let expect = 2.0 * std::f64::consts::PI * 10f64.powf(s / 2.0) / 2f64.sqrt();
        let v: f64 = r[5].parse().unwrap();
        assert!((v - expect).abs() <= 1e-14 * expect, "{r:?} vs {expect}");
    }
}

#[test]
fn stored_bourgain_norm_matches_in_memory() {
    let dir = tempfile::tempdir().unwrap();
    let rows = norms_output(
        dir.path(),
        "[grid]\nn = 64\n[integrator]\ndt = 1e-2\nt_end = 0.5",
        "sobolev = []\nlebesgue = []\nbourgain = [[0, 0.375]]\nwindows = 2",
    );
    let cfg = RunConfig::load(&dir.path().join("run.toml")).unwrap();
    let mem = simulate(&cfg.equation.spec().unwrap(), &cfg.initial_datum().unwrap(), &IntegratorConfig::new(1e-2, 0.5)).unwrap();
    assert_eq!(rows.len(), 2);
    for (w, range) in [(0usize, 0..25), (1, 25..51)] {
        let x = SpaceTimeBlock::from_window(&mem, range).unwrap().xsb_norm(0.0, 0.375, BourgainVariant::X);
        let stored: f64 = rows[w][5].parse().unwrap();
        assert_eq!(stored.to_bits(), x.to_bits());
        assert_eq!(rows[w][4], "X^{0,0.375}");
    }
}

#[test]
fn full_campaign_on_default_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let start = std::time::Instant::now();
    let o = bin()
        .args(["verify", "--suite", "all", "--out"])
        .arg(dir.path().join("all.txt"))
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    let elapsed = start.elapsed();
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(elapsed < std::time::Duration::from_secs(600), "{elapsed:?}");
    for id in [
        "identity_suite",
        "conservation",
        "gauge_residual",
        "ft_residual",
        "wicked_reduction",
        "probe_bourgain_l4",
        "probe_strichartz",
        "probe_r_smoothing",
        "probe_exp_h1",
        "data_continuity",
    ] {
        assert!(text.contains(&format!("[{id}]\n")), "missing {id}");
    }
    assert!(text.ends_with("\npass = true\n"));
    println!("full campaign: {elapsed:.1?}");
}

#[test]
fn verify_leaves_the_trajectory_alone() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("run.mbot");
    let cfg = write_config(
        dir.path(),
        &format!(
            "[grid]\nn = 32\n[integrator]\ndt = 0.01\nt_end = 0.1\n[output]\npath = \"{}\"\n",
            traj.display()
        ),
    );
    assert_eq!(run(&["simulate"], &cfg).status.code(), Some(0));
    let before = std::fs::read(&traj).unwrap();
    assert_eq!(run(&["verify", "--suite", "identities"], &cfg).status.code(), Some(0));
    assert_eq!(std::fs::read(&traj).unwrap(), before);
    assert_eq!(run(&["norms"], &cfg).status.code(), Some(0));
}
