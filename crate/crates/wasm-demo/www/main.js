// pkg/ is generated by wasm-bindgen --target web; see README
import init, { simulateHeatmap, gaugeProfile, dyadicMultipliers } from './pkg/mbo_gauge_wasm_demo.js';

const COLORS = ['#1f77b4', '#d62728', '#2ca02c', '#9467bd', '#ff7f0e', '#8c564b', '#17becf', '#e377c2'];

function status(id, text, isError = false) {
  const el = document.getElementById(id);
  el.textContent = text;
  el.classList.toggle('err', isError);
}

// diverging blue-white-red, v in [-1, 1]
function diverging(v) {
  const t = Math.max(-1, Math.min(1, v));
  const a = Math.round(255 * (1 - Math.abs(t)));
  return t >= 0 ? [255, a, a] : [a, a, 255];
}

function drawHeatmap(canvas, data, n) {
  const rows = data.length / n;
  let scale = 0;
  for (const x of data) scale = Math.max(scale, Math.abs(x));
  canvas.width = n;
  canvas.height = rows;
  canvas.style.width = '512px';
  canvas.style.height = `${Math.min(600, Math.max(200, rows * 2))}px`;
  const ctx = canvas.getContext('2d');
  const img = ctx.createImageData(n, rows);
  // time runs downward, x to the right
  for (let i = 0; i < data.length; i++) {
    const [r, g, b] = diverging(scale > 0 ? data[i] / scale : 0);
    img.data.set([r, g, b, 255], 4 * i);
  }
  ctx.putImageData(img, 0, 0);
  return { rows, scale };
}

function plotLines(canvas, series, { xs, yMin, yMax }) {
  const ctx = canvas.getContext('2d');
  const { width: w, height: h } = canvas;
  const pad = 28;
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = '#bbb';
  ctx.strokeRect(pad, 8, w - pad - 8, h - pad - 8);
  const X = (x) => pad + ((x - xs[0]) / (xs[xs.length - 1] - xs[0])) * (w - pad - 8);
  const Y = (y) => 8 + (1 - (y - yMin) / (yMax - yMin)) * (h - pad - 8);
  if (yMin < 0 && yMax > 0) {
    ctx.beginPath();
    ctx.moveTo(pad, Y(0));
    ctx.lineTo(w - 8, Y(0));
    ctx.stroke();
  }
  ctx.font = '11px system-ui';
  series.forEach(({ label, values, dash }, i) => {
    ctx.strokeStyle = COLORS[i % COLORS.length];
    ctx.setLineDash(dash ?? []);
    ctx.beginPath();
    values.forEach((y, j) => (j ? ctx.lineTo(X(xs[j]), Y(y)) : ctx.moveTo(X(xs[j]), Y(y))));
    ctx.stroke();
    ctx.fillStyle = ctx.strokeStyle;
    ctx.fillText(label, pad + 6 + 70 * i, h - 8);
  });
  ctx.setLineDash([]);
}

function formValues(form) {
  return Object.fromEntries(new FormData(form).entries());
}

function runSimulation(e) {
  e?.preventDefault();
  const f = formValues(document.getElementById('sim'));
  const n = Number(f.n);
  status('sim-status', 'running…');
  // let the status paint before the (synchronous) solve
  setTimeout(() => {
    try {
      const t0 = performance.now();
      // bo and linear take no sign
      const sign = f.equation === 'bo' || f.equation === 'linear' ? '' : f.sign;
      const data = simulateHeatmap(f.equation, sign, f.preset, n, Number(f.dt), Number(f.t_end), Number(f.frames));
      const ms = performance.now() - t0;
      const { rows, scale } = drawHeatmap(document.getElementById('heat'), data, n);
      const stopped = rows < Number(f.frames) ? ` — stopped early (blow-up) after ${rows} frames` : '';
      status('sim-status', `${rows} frames × ${n} points in ${ms.toFixed(0)} ms; colour scale ±${scale.toPrecision(3)}; x → , t ↓${stopped}`);
    } catch (err) {
      status('sim-status', String(err.message ?? err), true);
    }
  }, 10);
}

function runGauge(e) {
  e?.preventDefault();
  const f = formValues(document.getElementById('gauge'));
  const n = Number(f.n);
  try {
    const p = gaugeProfile(f.preset, n);
    const block = (i) => Array.from(p.subarray(i * n, (i + 1) * n));
    const series = [
      { label: 'u', values: block(0) },
      { label: 'F', values: block(1), dash: [4, 3] },
      { label: 'Re v', values: block(2) },
      { label: 'Im v', values: block(3) },
      { label: '|v|', values: block(4), dash: [1, 2] },
    ];
    const all = series.flatMap((s) => s.values);
    const lim = Math.max(...all.map(Math.abs)) * 1.1 || 1;
    const xs = Array.from({ length: n }, (_, j) => (2 * Math.PI * j) / n);
    plotLines(document.getElementById('gauge-plot'), series, { xs, yMin: -lim, yMax: lim });
    status('gauge-status', `x ∈ [0, 2π); truncation tail of e^{±iF}: ${p[5 * n].toExponential(2)}`);
  } catch (err) {
    status('gauge-status', String(err.message ?? err), true);
  }
}

function runMultipliers(e) {
  e?.preventDefault();
  const max = Number(formValues(document.getElementById('lp')).max);
  const samples = 600;
  try {
    const m = dyadicMultipliers(max, samples);
    const rows = m.length / samples;
    const xs = Array.from({ length: samples }, (_, i) => (max * i) / (samples - 1));
    const series = [];
    for (let k = 0; k < rows - 1; k++) {
      series.push({ label: `χ${k}`, values: Array.from(m.subarray(k * samples, (k + 1) * samples)) });
    }
    series.push({ label: 'Σ', values: Array.from(m.subarray((rows - 1) * samples)), dash: [4, 3] });
    plotLines(document.getElementById('lp-plot'), series, { xs, yMin: -0.05, yMax: 1.1 });
    status('lp-status', `${rows - 1} dyadic blocks on [0, ${max}]; the dashed sum is identically 1`);
  } catch (err) {
    status('lp-status', String(err.message ?? err), true);
  }
}

await init();
document.getElementById('sim').addEventListener('submit', runSimulation);
document.getElementById('gauge').addEventListener('submit', runGauge);
document.getElementById('lp').addEventListener('submit', runMultipliers);
runSimulation();
runGauge();
runMultipliers();
