//! wasm-bindgen front end for the browser demo in `www/`.
//!
//! Each export is a thin wrapper over a plain function returning
//! `Result<_, String>`, so the same code paths run under `cargo test`.
//! Arrays cross the boundary as flat `Float64Array`s.

use mbo_gauge::config::{EquationConfig, EquationKind, Preset};
use mbo_gauge::gauge::gauge_transform;
use mbo_gauge::integrator::{simulate, IntegratorConfig};
use mbo_gauge::spectral::{dyadic_multiplier, dyadic_range};
use mbo_gauge::{Error, Grid, PeriodicField};
use wasm_bindgen::prelude::*;

const MAX_N: usize = 512;
const MAX_FRAMES: usize = 2000;

fn msg(e: Error) -> String {
    e.to_string()
}

fn datum(preset: &str, n: usize) -> Result<PeriodicField, String> {
    if n > MAX_N {
        return Err(format!("n = {n} is above the demo limit {MAX_N}"));
    }
    let grid = Grid::new(n).map_err(msg)?;
    preset.parse::<Preset>().map_err(msg)?.build(grid).map_err(msg)
}

fn kind(name: &str) -> Result<EquationKind, String> {
    Ok(match name {
        "mbo" => EquationKind::Mbo,
        "wicked" => EquationKind::Wicked,
        "bo" => EquationKind::Bo,
        "linear" => EquationKind::Linear,
        other => return Err(format!("unknown equation {other:?}")),
    })
}

/// Row-major `frames × n` grid values of `u(x, t)`, `frames` evenly spaced
/// snapshots over `[0, t_end]` (the first is `t = 0`). The row count is
/// `frames` unless the run blows up, in which case the rows recorded so
/// far come back.
pub fn heatmap(equation: &str, sign: &str, preset: &str, n: usize, dt: f64, t_end: f64, frames: usize) -> Result<Vec<f64>, String> {
    if !(2..=MAX_FRAMES).contains(&frames) {
        return Err(format!("frames must be in 2..={MAX_FRAMES}"));
    }
    let eq = EquationConfig {
        kind: kind(equation)?,
        sign: (!sign.is_empty()).then(|| sign.to_string()),
    };
    let spec = eq.spec().map_err(msg)?;
    let u0 = datum(preset, n)?;
    // round dt down so that frames - 1 intervals tile [0, t_end] exactly
    let intervals = frames - 1;
    let steps_per_frame = ((t_end / intervals as f64) / dt).ceil().max(1.0) as usize;
    let dt = t_end / (intervals * steps_per_frame) as f64;
    let cfg = IntegratorConfig {
        snapshot_stride: steps_per_frame,
        ..IntegratorConfig::new(dt, t_end)
    };
    let traj = match simulate(&spec, &u0, &cfg) {
        Ok(t) => t,
        Err(Error::BlowUp { partial, .. }) => *partial,
        Err(e) => return Err(msg(e)),
    };
    Ok(traj.snapshots().iter().flat_map(|s| s.synthesize_real()).collect())
}

/// `[u | F | Re v | Im v | |v|]` on the grid, `F = ∂⁻¹P_{≠c}(u²)`,, each block `n` long, followed
/// by the truncation tail of `e^{±iF}`.
pub fn gauge_profile(preset: &str, n: usize) -> Result<Vec<f64>, String> {
    let u = datum(preset, n)?;
    let st = gauge_transform(&u).map_err(msg)?;
    let v = st.v.synthesize();
    let mut out = Vec::with_capacity(5 * n + 1);
    out.extend(u.synthesize_real());
    out.extend(st.f.synthesize_real());
    out.extend(v.iter().map(|z| z.re));
    out.extend(v.iter().map(|z| z.im));
    out.extend(v.iter().map(|z| z.norm()));
    out.push(st.truncation_tail);
    Ok(out)
}

/// Littlewood–Paley multipliers `χ_k(ξ)` for `k ∈ dyadic_range(max_freq)`,
/// sampled at `samples` points of `[0, max_freq]`; rows are blocks. The
/// last row is the pointwise sum, which should be identically 1.
pub fn multipliers(max_freq: f64, samples: usize) -> Result<Vec<f64>, String> {
    if !(max_freq > 0.0 && max_freq <= 1e6) || !(2..=10_000).contains(&samples) {
        return Err("need 0 < max_freq <= 1e6 and 2 <= samples <= 10000".into());
    }
    let xs: Vec<f64> = (0..samples).map(|i| max_freq * i as f64 / (samples - 1) as f64).collect();
    let mut out = Vec::new();
    let mut sum = vec![0.0; samples];
    for k in dyadic_range(max_freq.ceil() as i64) {
        for (x, s) in xs.iter().zip(sum.iter_mut()) {
            let m = dyadic_multiplier(k, *x);
            *s += m;
            out.push(m);
        }
    }
    out.extend(sum);
    Ok(out)
}

fn js(r: Result<Vec<f64>, String>) -> Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = simulateHeatmap)]
#[allow(clippy::too_many_arguments)]
pub fn simulate_heatmap(equation: &str, sign: &str, preset: &str, n: usize, dt: f64, t_end: f64, frames: usize) -> Result<Vec<f64>, JsError> {
    js(heatmap(equation, sign, preset, n, dt, t_end, frames))
}

#[wasm_bindgen(js_name = gaugeProfile)]
pub fn gauge_profile_js(preset: &str, n: usize) -> Result<Vec<f64>, JsError> {
    js(gauge_profile(preset, n))
}

#[wasm_bindgen(js_name = dyadicMultipliers)]
pub fn dyadic_multipliers(max_freq: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    js(multipliers(max_freq, samples))
}
