import init, { curves, simulate, beltrami_slice } from "./pkg/flowtm_web.js";

const $ = (id) => document.getElementById(id);
const status = (msg, err = false) => {
  $("status").textContent = msg;
  $("status").className = err ? "error" : "";
};

let lastCurves = null;

function params() {
  return {
    machine: $("machine").value,
    inputs: Number($("inputs").value),
    heights: Number($("heights").value),
    band: Number($("band").value),
    target: $("target").value.trim(),
  };
}

function bounds(bands) {
  let [x0, x1, y0, y1] = [Infinity, -Infinity, Infinity, -Infinity];
  for (const b of bands) {
    for (const [x, y] of b.points) {
      x0 = Math.min(x0, x); x1 = Math.max(x1, x);
      y0 = Math.min(y0, y); y1 = Math.max(y1, y);
    }
  }
  return [x0 - 0.5, x1 + 0.5, y0 - 0.5, y1 + 0.5];
}

function projector(canvas, [x0, x1, y0, y1]) {
  const s = Math.min(canvas.width / (x1 - x0), canvas.height / (y1 - y0));
  return ([x, y]) => [(x - x0) * s, canvas.height - (y - y0) * s];
}

function polyline(ctx, pts, proj, colour, width) {
  ctx.strokeStyle = colour;
  ctx.lineWidth = width;
  ctx.beginPath();
  pts.forEach((p, i) => {
    const [a, b] = proj(p);
    i ? ctx.lineTo(a, b) : ctx.moveTo(a, b);
  });
  ctx.stroke();
}

function drawCurves(extra) {
  const c = $("plane");
  const ctx = c.getContext("2d");
  ctx.clearRect(0, 0, c.width, c.height);
  const proj = projector(c, bounds(lastCurves.bands));
  for (const b of lastCurves.bands) {
    polyline(ctx, b.points, proj, "#999", 1);
    ctx.fillStyle = "#c22";
    for (const a of b.anchors) {
      const [px, py] = proj(a);
      ctx.fillRect(px - 2, py - 2, 4, 4);
    }
  }
  if (extra) polyline(ctx, extra, proj, "#125", 2);
}

function onDraw() {
  const p = params();
  try {
    lastCurves = JSON.parse(curves(p.machine, p.inputs, p.heights));
    drawCurves();
    status(`${lastCurves.machine}: ${lastCurves.bands.length} bands, Λ = ${lastCurves.lambda.toExponential(3)}`);
  } catch (e) {
    status(String(e), true);
  }
}

function onRun() {
  const p = params();
  try {
    if (!lastCurves || lastCurves.machine !== p.machine) onDraw();
    const r = JSON.parse(simulate(p.machine, p.inputs, p.heights, p.band, p.target));
    drawCurves(r.points);
    const last = r.ln_rho[r.ln_rho.length - 1];
    status(`band ${p.band}: ${r.verdict}, hit=${r.hit}, final ln|ρ| = ${last ? last[1].toExponential(3) : "-"}`);
  } catch (e) {
    status(String(e), true);
  }
}

function onSlice() {
  const c = $("field");
  const ctx = c.getContext("2d");
  try {
    const n = 15;
    const r = JSON.parse(beltrami_slice($("datum").value, Number($("lambda").value), 16, Number($("z").value), n));
    ctx.clearRect(0, 0, c.width, c.height);
    const max = Math.max(1e-12, ...r.samples.map(([, , a, b]) => Math.hypot(a, b)));
    const step = c.width / (n + 1);
    for (const [x, y, ux, uy, uz] of r.samples) {
      const cx = (x + 1) / 2 * (c.width - 2 * step) + step;
      const cy = c.height - ((y + 1) / 2 * (c.height - 2 * step) + step);
      const k = 0.45 * step / max;
      ctx.strokeStyle = uz >= 0 ? "#135" : "#a31";
      ctx.beginPath();
      ctx.moveTo(cx, cy);
      ctx.lineTo(cx + ux * k, cy - uy * k);
      ctx.stroke();
      ctx.fillRect(cx - 1, cy - 1, 2, 2);
    }
    status(`slice z = ${$("z").value}: residual checks ${r.ok ? "pass" : "FAIL"} through order ${r.checked_through}`);
  } catch (e) {
    status(String(e), true);
  }
}

await init();
$("draw").onclick = onDraw;
$("run").onclick = onRun;
$("slice").onclick = onSlice;
$("z").oninput = onSlice;
onDraw();
onSlice();
