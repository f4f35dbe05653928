//! Acceptance criteria 1-10. Every test prints one `criterion N ...: PASS|FAIL`
//! line with the measured values before asserting, so `--nocapture` output
//! doubles as a scorecard. Tolerances are pinned here, not read back from
//! the library defaults (which are checked against them separately).
//!
//! The tests take a shared lock: several carry wall-clock budgets, and
//! timing them while the others compete for the same cores would measure
//! the scheduler.

use std::f64::consts::PI;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use mbo_gauge::config::RunConfig;
use mbo_gauge::equations::{mean_momentum_energy, EquationSpec, Sign, Trajectory};
use mbo_gauge::integrator::{evolve, simulate, step, IntegratorConfig};
use mbo_gauge::io;
use mbo_gauge::norms::{sobolev_norm, taper, BourgainVariant, SpaceTimeBlock};
use mbo_gauge::random::{rng, Ensemble};
use mbo_gauge::verify::{self, DiagnosticsReport, ProbeKind, ProbeStudy, Thresholds};
use mbo_gauge::{Complex64, Grid, PeriodicField};
use rand::Rng;

const IDENTITY_TOL: f64 = 1e-9;
const MEAN_DRIFT_TOL: f64 = 1e-11;
const CONSERVATION_RATIO: (f64, f64) = (11.0, 22.0);
const RESIDUAL_ORDER: (f64, f64) = (1.8, 2.2);
const REFINEMENT_CHANGE: f64 = 0.1;
const REDUCTION_ORDER: f64 = 2.0;
const RK4_ORDER: (f64, f64) = (3.5, 4.5);
const LINEAR_EXACT_TOL: f64 = 1e-13;
const PLANCHEREL_TOL: f64 = 1e-10;
const ISOMETRY_TOL: f64 = 1e-10;
const PROBE_SPREAD: f64 = 10.0;
const PROBE_SLOPE: f64 = 0.1;
const CONTINUITY_SPREAD: f64 = 3.0;

static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn verdict(id: u32, name: &str, pass: bool, detail: &str) {
    println!("criterion {id} [{name}]: {} — {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} [{name}] failed: {detail}");
}

fn grid(n: usize) -> Grid {
    Grid::new(n).unwrap()
}

fn metric(r: &DiagnosticsReport, name: &str) -> f64 {
    r.get(name).unwrap_or_else(|| panic!("{} lacks metric {name}", r.test_id))
}

fn within(x: f64, (lo, hi): (f64, f64)) -> bool {
    x >= lo && x <= hi
}

/// Point values by a direct O(N²) sum over the stored modes — no FFT.
fn naive_synthesis(f: &PeriodicField) -> Vec<Complex64> {
    let n = f.grid().n_modes();
    let asc = f.ascending();
    (0..n)
        .map(|j| {
            let x = 2.0 * PI * j as f64 / n as f64;
            asc.iter()
                .enumerate()
                .map(|(i, c)| c * Complex64::from_polar(1.0, (i as f64 - (n / 2) as f64) * x))
                .sum()
        })
        .collect()
}

#[test]
fn library_defaults_match_pinned_tolerances() {
    let th = Thresholds::default();
    assert_eq!(th.identity_residual, IDENTITY_TOL);
    assert_eq!(th.mean_drift, MEAN_DRIFT_TOL);
    assert_eq!(th.conservation_ratio, [CONSERVATION_RATIO.0, CONSERVATION_RATIO.1]);
    assert_eq!(th.residual_order, [RESIDUAL_ORDER.0, RESIDUAL_ORDER.1]);
    assert_eq!(th.refinement_change, REFINEMENT_CHANGE);
    assert_eq!(th.reduction_order, REDUCTION_ORDER);
    assert_eq!(th.probe_spread, PROBE_SPREAD);
    assert_eq!(th.probe_slope, PROBE_SLOPE);
    assert_eq!(th.continuity_spread, CONTINUITY_SPREAD);
    // the default config runs the criteria's data
    let v = RunConfig::default().verify;
    assert_eq!((v.seed, v.identities.n, v.identities.trials), (1, 64, 100));
    assert_eq!((v.conservation.n, v.conservation.preset.as_str()), (128, "cosine 1.0 1"));
    assert_eq!((v.gauge.n, v.gauge.preset.as_str()), (128, "cosine 0.5 1"));
    assert_eq!(v.wicked.preset, "two-mode 0.4 1 0.2 2");
    assert_eq!((v.probes.trials, v.probes.grids.clone()), (200, vec![32, 64, 128]));
    assert_eq!(v.continuity.study.deltas, vec![1e-2, 1e-3, 1e-4]);
}

#[test]
fn criterion_01_identity_suite() {
    let _g = serial();
    // oracle: u = cos x, every identity holds by direct evaluation
    let r = verify::identity_residuals(&PeriodicField::cosine(grid(64), 1.0, 1).unwrap()).unwrap();
    assert!(r.max_residual() < 1e-10, "{r:?}");

    let start = Instant::now();
    let study = verify::IdentityStudy::default();
    assert_eq!((study.n, study.trials), (64, 100));
    let rep = verify::identity_suite(1, &study, &Thresholds::default()).unwrap();
    let elapsed = start.elapsed();
    let worst = rep
        .metrics
        .iter()
        .filter(|m| m.name.ends_with("_max") && m.name != "truncation_tail_max")
        .map(|m| m.value)
        .fold(0.0, f64::max);
    let names = ["b_identity", "rewrite", "recover_plus", "recover_minus", "exp_derivative", "hilbert_square", "projection_partition"];
    let all_present = names.iter().all(|n| rep.get(&format!("{n}_max")).is_some());
    verdict(
        1,
        "identity suite",
        all_present && worst < IDENTITY_TOL && rep.pass && elapsed < Duration::from_secs(30),
        &format!(
            "100 fields, N=64, seed 1: max residual {worst:.2e} (< {IDENTITY_TOL:e}), truncation tail {:.1e}, {elapsed:.2?} (< 30 s)",
            metric(&rep, "truncation_tail_max")
        ),
    );
}

#[test]
fn criterion_02_conservation() {
    let _g = serial();
    let g = grid(128);
    let u0 = PeriodicField::cosine(g, 1.0, 1).unwrap();
    // oracle: ∫cos = 0, ∫cos² = π, ½∫cos·H∂cos + ∫cos⁴/12 = π/2 + π/16
    let q = mean_momentum_energy(&u0, Sign::Defocusing);
    assert!(q.mean.abs() < 1e-15 && (q.momentum - PI).abs() < 1e-14 && (q.energy - 9.0 * PI / 16.0).abs() < 1e-14);

    let start = Instant::now();
    let spec = EquationSpec::Mbo(Sign::Defocusing);
    let dts = [4e-3, 2e-3, 1e-3];
    let drifts: Vec<_> = dts
        .iter()
        .map(|&dt| {
            let traj = simulate(&spec, &u0, &IntegratorConfig::new(dt, 1.0)).unwrap();
            verify::conservation_drifts(&traj, Sign::Defocusing).unwrap()
        })
        .collect();
    let elapsed = start.elapsed();
    let mean_ok = drifts.iter().all(|d| d.mean < MEAN_DRIFT_TOL);
    let ratios: Vec<(f64, f64)> = drifts
        .windows(2)
        .map(|w| (w[0].momentum / w[1].momentum, w[0].energy / w[1].energy))
        .collect();
    let ratios_ok = ratios.iter().all(|&(m, e)| within(m, CONSERVATION_RATIO) && within(e, CONSERVATION_RATIO));

    let rep = verify::check_conservation(&u0, &verify::ConservationStudy::default(), &Thresholds::default()).unwrap();
    verdict(
        2,
        "conservation",
        mean_ok && ratios_ok && rep.pass && elapsed < Duration::from_secs(120),
        &format!(
            "mean drifts {:?}; momentum drifts {:?}; energy drifts {:?}; (momentum, energy) ratios {ratios:.2?} in [11, 22]; {elapsed:.2?} (< 2 min)",
            drifts.iter().map(|d| d.mean).collect::<Vec<_>>(),
            drifts.iter().map(|d| format!("{:.2e}", d.momentum)).collect::<Vec<_>>(),
            drifts.iter().map(|d| format!("{:.2e}", d.energy)).collect::<Vec<_>>(),
        ),
    );
}

/// Criteria 3 and 4 share one run.
#[test]
fn criteria_03_04_gauged_equation_and_ft() {
    let _g = serial();
    let u0 = PeriodicField::cosine(grid(128), 0.5, 1).unwrap();
    let start = Instant::now();
    let study = verify::GaugeStudy::default();
    assert_eq!((study.t_end, study.refined_n), (0.5, 256));
    let (gauge, ft) = verify::gauge_study(&u0, &study, &Thresholds::default()).unwrap();
    let elapsed = start.elapsed();

    let order = metric(&gauge, "order@1e-3->5e-4");
    let change = metric(&gauge, "refinement_change");
    let residual = metric(&gauge, "residual_max@dt=5e-4");
    verdict(
        3,
        "gauged equation",
        within(order, RESIDUAL_ORDER) && change < REFINEMENT_CHANGE && gauge.pass && elapsed < Duration::from_secs(180),
        &format!(
            "H^1/2 residual max {residual:.3e} at dt=5e-4, order {order:.4} in [1.8, 2.2], N=128->256 change {:.2e} (< 10%); \
             transcribed source term: residual {:.3e}, order {:.3}; {elapsed:.2?} (< 3 min)",
            change,
            metric(&gauge, "printed_source_residual_max@dt=5e-4"),
            metric(&gauge, "printed_source_order@1e-3->5e-4"),
        ),
    );

    let ft_order = metric(&ft, "order@1e-3->5e-4");
    verdict(
        4,
        "F_t closed form",
        within(ft_order, RESIDUAL_ORDER) && ft.pass,
        &format!(
            "L2 residual {:.3e} -> {:.3e}, order {ft_order:.4} in [1.8, 2.2]",
            metric(&ft, "residual_max@dt=1e-3"),
            metric(&ft, "residual_max@dt=5e-4")
        ),
    );
}

#[test]
fn criterion_05_wicked_reduction() {
    let _g = serial();
    let g = grid(128);
    let u0 = &PeriodicField::cosine(g, 0.4, 1).unwrap() + &PeriodicField::cosine(g, 0.2, 2).unwrap();
    let rep = verify::verify_wicked_reduction(&u0, &verify::ReductionStudy::default(), &Thresholds::default()).unwrap();
    let pairs = ["focusing/+", "focusing/-", "defocusing/+", "defocusing/-"];
    let orders: Vec<(String, f64)> = pairs.iter().map(|p| (p.to_string(), metric(&rep, &format!("order[{p}]")))).collect();
    let converging: Vec<&str> = orders
        .iter()
        .filter(|(_, o)| o.is_finite() && *o >= REDUCTION_ORDER)
        .map(|(p, _)| p.as_str())
        .collect();
    let named = rep.findings.get("matching_pair").cloned().unwrap_or_default();
    verdict(
        5,
        "Wicked reduction",
        converging.len() == 1 && named == converging[0] && rep.pass,
        &format!("orders {orders:.2?}; unique converging pair: {named}"),
    );
}

#[test]
fn criterion_06_integrator() {
    let _g = serial();
    let g = grid(128);
    let u0 = PeriodicField::cosine(g, 1.0, 1).unwrap();
    let spec = EquationSpec::Mbo(Sign::Defocusing);
    let [a, b, c] = [4e-3, 2e-3, 1e-3].map(|dt| evolve(&spec, &u0, dt, 1.0).unwrap());
    let order = ((&a - &b).coeff_norm() / (&b - &c).coeff_norm()).log2();

    // oracle for W(dt): multiply c_k by exp(-i|k|k dt)
    let dt = 1e-2;
    let mut r = rng(5);
    let mut worst: f64 = 0.0;
    for f in [
        Ensemble::complex(63).sample(g, &mut r).unwrap(),
        Ensemble::real(63).with_decay(0.0).sample(g, &mut r).unwrap(),
    ] {
        let stepped = step(&EquationSpec::Linear, &f, dt);
        for k in -63i64..=63 {
            let expect = f.coeff(k) * Complex64::from_polar(1.0, -((k.abs() * k) as f64) * dt);
            worst = worst.max((stepped.coeff(k) - expect).norm());
        }
    }
    verdict(
        6,
        "integrator",
        within(order, RK4_ORDER) && worst < LINEAR_EXACT_TOL,
        &format!("3-level self-convergence order {order:.3} (4 ± 0.5); linear step vs W(dt) max coefficient error {worst:.1e} (< 1e-13)"),
    );
}

#[test]
fn criterion_07_norms() {
    let _g = serial();
    let g = grid(32);
    let mut sob_err: f64 = 0.0;
    for k in [-16i64, -7, 0, 1, 5, 15] {
        let f = PeriodicField::from_modes(g, false, &[(k, Complex64::new(1.0, 0.0))]).unwrap();
        for s in [-1.0, 0.0, 0.5, 1.0, 1.3, 2.0] {
            let expect = 2.0 * PI * (1.0 + (k * k) as f64).powf(s / 2.0);
            sob_err = sob_err.max((sobolev_norm(&f, s) - expect).abs() / expect);
        }
    }

    let mut r = rng(77);
    let (mut plancherel_err, mut iso_err): (f64, f64) = (0.0, 0.0);
    for trial in 0..10 {
        let mut modes = Vec::new();
        while modes.len() < 4 {
            let k = r.random_range(-16i64..16);
            if modes.iter().all(|&(j, _)| j != k) {
                modes.push((k, Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))));
            }
        }
        let f = PeriodicField::from_modes(g, false, &modes).unwrap();
        let m = 16 + trial * 3;
        let h = 0.02;
        let snaps: Vec<_> = (0..m)
            .map(|i| {
                let t = i as f64 * h;
                f.propagate_free(t).scale(1.0 + 0.5 * (3.0 * t).sin())
            })
            .collect();
        let traj = Trajectory::new(g, 0.1, h, snaps).unwrap();
        let block = SpaceTimeBlock::new(&traj).unwrap();

        // windowed space-time L², x-integral from exact point values
        let (t_a, t_b) = (traj.time(0), traj.time(m - 1));
        let mut l2sq = 0.0;
        for (i, s) in traj.snapshots().iter().enumerate() {
            let w = taper(traj.time(i), t_a, t_b);
            let pts = naive_synthesis(s);
            l2sq += h * (2.0 * PI / 32.0) * w * w * pts.iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
        // X^{0,0} carries the 2π of the unnormalized transform in x
        let oracle = 2.0 * PI * l2sq.sqrt();
        let x00 = block.xsb_norm(0.0, 0.0, BourgainVariant::X);
        plancherel_err = plancherel_err.max((x00 - oracle).abs() / oracle);

        let bar = SpaceTimeBlock::new(&traj.map(|s| s.conj())).unwrap();
        for (s, b) in [(0.0, 0.0), (0.5, 0.5), (1.0, 0.375), (-0.5, 1.0)] {
            for v in [BourgainVariant::X, BourgainVariant::Z] {
                let (x, y) = (block.xsb_norm(s, b, v), bar.xsb_norm(s, b, v));
                iso_err = iso_err.max((x - y).abs() / x);
            }
        }
    }
    verdict(
        7,
        "norm correctness",
        sob_err <= 4.0 * f64::EPSILON && plancherel_err < PLANCHEREL_TOL && iso_err < ISOMETRY_TOL,
        &format!(
            "H^s of e^(ikx) vs 2π<k>^s: rel err {sob_err:.1e} (≤ 4 ulp); X^(0,0) vs 2π‖taper·u‖: {plancherel_err:.1e}; \
             conjugation: {iso_err:.1e} (< 1e-10) over 10 random 4-mode fields"
        ),
    );
}

#[test]
fn criterion_08_probes() {
    let _g = serial();
    let study = ProbeStudy::default();
    assert_eq!((study.trials, study.grids.clone()), (200, vec![32, 64, 128]));
    let start = Instant::now();
    let mut ok = true;
    let mut lines = Vec::new();
    for kind in ProbeKind::ALL {
        let rep = verify::estimate_probe(kind, 1, &study, &Thresholds::default()).unwrap();
        let spreads: Vec<f64> = study.grids.iter().map(|n| metric(&rep, &format!("spread@n={n}"))).collect();
        let slope = metric(&rep, "growth_slope");
        ok &= rep.pass && spreads.iter().all(|&s| s <= PROBE_SPREAD) && slope < PROBE_SLOPE;
        lines.push(format!("{kind}: spreads {spreads:.2?}, slope {slope:+.3}"));
    }
    let elapsed = start.elapsed();
    verdict(
        8,
        "estimate probes",
        ok && elapsed < Duration::from_secs(300),
        &format!("{}; {elapsed:.1?} (< 5 min)", lines.join("; ")),
    );
}

#[test]
fn criterion_09_data_continuity() {
    let _g = serial();
    let u0 = PeriodicField::cosine(grid(128), 1.0, 1).unwrap();
    let study = verify::ContinuityStudy::default();
    let rep = verify::data_continuity(&u0, Sign::Defocusing, &study, &Thresholds::default()).unwrap();
    let ratios: Vec<f64> = ["1e-2", "1e-3", "1e-4"].iter().map(|d| metric(&rep, &format!("ratio@delta={d}"))).collect();
    let spread = ratios.iter().copied().fold(0.0, f64::max) / ratios.iter().copied().fold(f64::INFINITY, f64::min);
    verdict(
        9,
        "data continuity",
        spread <= CONTINUITY_SPREAD && rep.pass,
        &format!("sup_t ‖Δu‖_H^1/2 / δ = {ratios:.4?} for δ = 1e-2, 1e-3, 1e-4; spread {spread:.4} (≤ 3)"),
    );
}

#[test]
fn criterion_10_persistence() {
    let _g = serial();
    let g = grid(64);
    let u0 = PeriodicField::cosine(g, 1.0, 1).unwrap();
    let traj = simulate(&EquationSpec::Mbo(Sign::Defocusing), &u0, &IntegratorConfig::new(1e-3, 0.2).with_stride(4)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.mbot");
    io::save_trajectory(&path, &traj, None).unwrap();
    let back = io::load_trajectory(&path).unwrap();
    let bits_equal = back.trajectory.len() == traj.len()
        && back.trajectory.t0().to_bits() == traj.t0().to_bits()
        && back.trajectory.dt().to_bits() == traj.dt().to_bits()
        && traj.snapshots().iter().zip(back.trajectory.snapshots()).all(|(a, b)| {
            a.coeffs()
                .iter()
                .zip(b.coeffs())
                .all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits())
        });
    let bytes_equal = std::fs::read(&path).unwrap() == io::encode_trajectory(&back.trajectory, None);

    let text = "[verify]\nseed = 1\n[verify.identities]\ntrials = 10\n";
    let run = || {
        let cfg = RunConfig::parse(text).unwrap();
        let c = cfg.run_suite(mbo_gauge::config::Suite::Identities).unwrap();
        (cfg.provenance(), c.to_text())
    };
    let (h1, r1) = run();
    let (h2, r2) = run();
    verdict(
        10,
        "persistence",
        bits_equal && bytes_equal && h1 == h2 && r1 == r2 && r1.contains(&h1),
        &format!(
            "{} snapshots round-trip bitwise: {bits_equal}, re-encoding identical: {bytes_equal}; provenance {h1} stable: {}, reports identical: {}",
            traj.len(),
            h1 == h2,
            r1 == r2
        ),
    );
}
