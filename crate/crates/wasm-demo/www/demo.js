// Plain-canvas front end for the wpl-wasm exports. Build the `pkg/`
// directory with wasm-bindgen (see the README) and serve this folder.
import init, { explore_geometry, run_tomography_demo, run_vqe_demo } from "./pkg/wpl_wasm.js";

const $ = (id) => document.getElementById(id);
const fmt = (x) => (x === null || x === undefined ? "—" : Number(x).toPrecision(6));

function call(out, f) {
  try {
    return JSON.parse(f());
  } catch (e) {
    out.textContent = `error: ${e}`;
    out.className = "err";
    return null;
  }
}

function clear(ctx) {
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
}

// ---------------------------------------------------------------- geometry

function drawProfile(ctx, view) {
  clear(ctx);
  const { width: w, height: h } = ctx.canvas;
  const pts = view.profile;
  const embedded = pts.filter((p) => p.z !== null);
  const zMax = Math.max(...embedded.map((p) => p.z), 1e-9);
  const rMax = Math.max(...pts.map((p) => p.rho), 1e-9);
  const scale = Math.min((w - 40) / (2 * rMax), (h - 40) / zMax);
  const cx = w / 2, top = 20;
  ctx.lineWidth = 2;
  ctx.strokeStyle = "#2a6";
  for (const side of [-1, 1]) {
    ctx.beginPath();
    embedded.forEach((p, i) => {
      const x = cx + side * p.rho * scale, y = top + p.z * scale;
      i ? ctx.lineTo(x, y) : ctx.moveTo(x, y);
    });
    ctx.stroke();
  }
  // Circles of latitude as flattened ellipses.
  ctx.lineWidth = 1;
  ctx.strokeStyle = "#9cb";
  for (let i = 15; i < embedded.length; i += 15) {
    const p = embedded[i];
    ctx.beginPath();
    ctx.ellipse(cx, top + p.z * scale, p.rho * scale, 0.15 * p.rho * scale, 0, 0, 2 * Math.PI);
    ctx.stroke();
  }
  ctx.fillStyle = "#444";
  const note = embedded.length < pts.length
    ? `embeddable in ℝ³ for θ ≤ ${fmt(embedded.at(-1).theta)} only`
    : "surface of revolution (isometric embedding)";
  ctx.fillText(note, 10, h - 8);
}

function updateGeometry() {
  const perp = Number($("g-perp").value), par = Number($("g-par").value);
  $("g-perp-v").textContent = perp.toFixed(2);
  $("g-par-v").textContent = par.toFixed(2);
  const out = $("g-out");
  const v = call(out, () => explore_geometry(perp, par, $("g-conv").value));
  if (!v) return;
  out.className = "";
  out.textContent = [
    `branch      ${v.branch}`,
    `a/b         ${fmt(v.wpl.a_over_b)}`,
    `b           ${fmt(v.wpl.b)}`,
    `R           ${fmt(v.wpl.R)}`,
    `area        ${fmt(v.area)}   (4π = ${fmt(4 * Math.PI)})`,
  ].join("\n");
  drawProfile($("g-canvas").getContext("2d"), v);
}

// -------------------------------------------------------------- tomography

function drawHistogram(ctx, samples, ci, truth) {
  clear(ctx);
  const { width: w, height: h } = ctx.canvas;
  if (!samples.length) {
    ctx.fillStyle = "#444";
    ctx.fillText("exact mode: no bootstrap replicates", 10, 20);
    return;
  }
  const lo = Math.min(...samples, truth), hi = Math.max(...samples, truth);
  const span = hi - lo || 1e-3;
  const bins = new Array(30).fill(0);
  for (const s of samples) bins[Math.min(29, Math.floor(((s - lo) / span) * 30))]++;
  const peak = Math.max(...bins);
  const x = (v) => 20 + ((v - lo) / span) * (w - 40);
  const bw = (w - 40) / 30;
  ctx.fillStyle = "#8ab";
  bins.forEach((c, i) => ctx.fillRect(20 + i * bw, h - 20 - (c / peak) * (h - 50), bw - 1, (c / peak) * (h - 50)));
  ctx.fillStyle = "rgba(40,160,90,0.2)";
  ctx.fillRect(x(ci.lower), 10, x(ci.upper) - x(ci.lower), h - 30);
  ctx.strokeStyle = "#c33";
  ctx.beginPath();
  ctx.moveTo(x(truth), 10);
  ctx.lineTo(x(truth), h - 20);
  ctx.stroke();
  ctx.fillStyle = "#444";
  ctx.fillText(`bootstrap b: ${fmt(lo)} … ${fmt(hi)}; red = true λ⊥, green = 95% CI`, 10, h - 5);
}

function runTomography() {
  const out = $("t-out");
  const v = call(out, () =>
    run_tomography_demo($("t-channel").value, Number($("t-shots").value), Number($("t-b").value), BigInt($("t-seed").value)),
  );
  if (!v) return;
  out.className = "";
  const row = (m, i) => m[i].map((x) => fmt(x).padStart(11)).join(" ");
  const lines = [
    "T̂ (estimate)                           T (truth)",
    ...[0, 1, 2].map((i) => `${row(v.t, i)}    ${row(v.truth_t, i)}`),
    `ĉ = (${v.c.map(fmt).join(", ")})   c = (${v.truth_c.map(fmt).join(", ")})`,
    "",
    `λ⊥ ${fmt(v.report.lambda_perp)}  λ∥ ${fmt(v.report.lambda_par)}  branch ${v.report.branch}  phase-covariant ${v.report.phase_covariant}`,
    `a/b ${fmt(v.report.a_over_b)}  b ${fmt(v.report.b)}  R ${fmt(v.report.R)}  (δ = ${fmt(v.report.delta)})`,
  ];
  if (v.bootstrap) {
    const ci = v.bootstrap.ci;
    lines.push(`95% CI  a/b [${fmt(ci.a_over_b.lower)}, ${fmt(ci.a_over_b.upper)}]  b [${fmt(ci.b.lower)}, ${fmt(ci.b.upper)}]  R [${fmt(ci.R.lower)}, ${fmt(ci.R.upper)}]`);
  }
  out.textContent = lines.join("\n");
  const truePerp = Math.hypot(v.truth_t[0][0], v.truth_t[0][1], v.truth_t[1][0], v.truth_t[1][1]) / Math.SQRT2;
  drawHistogram($("t-canvas").getContext("2d"), v.samples_b, v.bootstrap?.ci.b ?? { lower: 0, upper: 0 }, truePerp);
}

// --------------------------------------------------------------------- vqe

const COLORS = { euclid: "#888", bloch_qng: "#36c", wpl_qng: "#c33" };

function runVqe() {
  const ctx = $("v-canvas").getContext("2d");
  clear(ctx);
  let series;
  try {
    series = JSON.parse(run_vqe_demo(Number($("v-eta").value), Number($("v-iters").value), Number($("v-shots").value), BigInt($("v-seed").value)));
  } catch (e) {
    ctx.fillStyle = "#b00";
    ctx.fillText(`error: ${e}`, 10, 20);
    return;
  }
  const { width: w, height: h } = ctx.canvas;
  const all = series.flatMap((s) => s.abs_error).filter((x) => x > 0 && Number.isFinite(x));
  const lmin = Math.log10(Math.min(...all)), lmax = Math.log10(Math.max(...all));
  const n = Math.max(...series.map((s) => s.abs_error.length)) - 1 || 1;
  const x = (i) => 50 + (i / n) * (w - 200);
  const y = (e) => 15 + ((lmax - Math.log10(e)) / (lmax - lmin || 1)) * (h - 40);
  ctx.strokeStyle = "#ccc";
  ctx.strokeRect(50, 15, w - 200, h - 40);
  ctx.fillStyle = "#444";
  ctx.fillText(`|E − E₀| (log scale) ${fmt(10 ** lmax)} … ${fmt(10 ** lmin)}`, 55, h - 8);
  series.forEach((s, k) => {
    ctx.strokeStyle = COLORS[s.optimizer] ?? "#000";
    ctx.lineWidth = 2;
    ctx.beginPath();
    s.abs_error.forEach((e, i) => (i ? ctx.lineTo(x(i), y(Math.max(e, 1e-300))) : ctx.moveTo(x(i), y(e))));
    ctx.stroke();
    ctx.fillStyle = ctx.strokeStyle;
    const label = `${s.optimizer}: ${fmt(s.abs_error.at(-1))}${s.aborted ? " (aborted)" : ""}`;
    ctx.fillText(label, w - 140, 30 + 18 * k);
  });
}

// -------------------------------------------------------------------------

await init();
$("status").textContent = "Ready. All computation runs in the page via WebAssembly.";
for (const id of ["g-perp", "g-par", "g-conv"]) $(id).addEventListener("input", updateGeometry);
$("t-run").addEventListener("click", runTomography);
$("v-run").addEventListener("click", runVqe);
updateGeometry();
runTomography();
runVqe();
