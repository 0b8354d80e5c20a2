import init, { flow_trajectories, hat_interpolation, mod2_det_track } from "./pkg/sflab_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

// Maps data ranges onto the canvas with a small margin and draws axes at zero.
function frame(canvas, xr, yr) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 24;
  ctx.clearRect(0, 0, w, h);
  const sx = (x) => pad + ((x - xr[0]) / (xr[1] - xr[0] || 1)) * (w - 2 * pad);
  const sy = (y) => h - pad - ((y - yr[0]) / (yr[1] - yr[0] || 1)) * (h - 2 * pad);
  ctx.strokeStyle = "#bbb";
  ctx.beginPath();
  ctx.moveTo(pad, sy(0)); ctx.lineTo(w - pad, sy(0));
  ctx.stroke();
  ctx.fillStyle = "#666";
  ctx.fillText(xr[0].toFixed(2), pad, h - 6);
  ctx.fillText(xr[1].toFixed(2), w - pad - 24, h - 6);
  ctx.fillText(yr[1].toFixed(2), 2, pad);
  ctx.fillText(yr[0].toFixed(2), 2, h - pad);
  return { ctx, sx, sy };
}

function range(values) {
  let lo = Math.min(...values), hi = Math.max(...values);
  if (lo === hi) { lo -= 1; hi += 1; }
  return [lo, hi];
}

function parse(json, out) {
  const r = JSON.parse(json);
  if (r.error) { $(out).textContent = "error: " + r.error; return null; }
  return r;
}

function runFlow() {
  const r = parse(flow_trajectories(num("f-n"), num("f-q"), num("f-m"), $("f-band").checked, 41, 6), "f-out");
  if (!r) return;
  const yr = range(r.eigs.flat());
  const { ctx, sx, sy } = frame($("f-canvas"), [-1, 1], yr);
  ctx.fillStyle = "#1f5fa8";
  r.t.forEach((t, k) => r.eigs[k].forEach((e) => ctx.fillRect(sx(t) - 2, sy(e) - 2, 4, 4)));
  $("f-out").textContent =
    `spectral flow ${r.sf}   eta(h(-1)) ${r.eta_minus}   eta(h(1)) ${r.eta_plus}   eigensolves ${r.solves}`;
}

function runHat() {
  const vals = $("h-vals").value.trim().split(/[\s,]+/).map(Number);
  const r = parse(hat_interpolation(new Float64Array(vals), num("h-ratio"), num("h-conn")), "h-out");
  if (!r) return;
  const yr = range([...r.re, ...r.im, ...vals]);
  const { ctx, sx, sy } = frame($("h-canvas"), [0, 1], yr);
  const line = (xs, ys, color) => {
    ctx.strokeStyle = color;
    ctx.beginPath();
    xs.forEach((x, i) => (i ? ctx.lineTo(sx(x), sy(ys[i])) : ctx.moveTo(sx(x), sy(ys[i]))));
    ctx.stroke();
  };
  line(r.fine_x, r.re, "#1f5fa8");
  line(r.fine_x, r.im, "#c0642a");
  ctx.fillStyle = "#000";
  r.coarse_x.forEach((x, i) => ctx.fillRect(sx(x) - 3, sy(vals[i]) - 3, 6, 6));
  $("h-out").textContent = `${vals.length} coarse sites -> ${r.fine_x.length} fine sites (blue: real, orange: imaginary)`;
}

function runDet() {
  const r = parse(mod2_det_track(num("d-n"), num("d-m"), $("d-anti").checked, 81), "d-out");
  if (!r) return;
  const yr = range(r.log_abs_det);
  const { ctx, sx, sy } = frame($("d-canvas"), [-1, 1], yr);
  r.t.forEach((t, i) => {
    ctx.fillStyle = r.sign[i] > 0 ? "#1f5fa8" : "#c0642a";
    ctx.fillRect(sx(t) - 2, sy(r.log_abs_det[i]) - 2, 4, 4);
  });
  const v = r.v_parity === null ? "n/a" : r.v_parity;
  $("d-out").textContent =
    `log|det| (blue: det > 0, orange: det < 0)   endpoint parity ${r.parity}   grid parity ${r.tracked_parity}   congruence parity ${v}`;
}

await init();
$("f-go").onclick = runFlow;
$("h-go").onclick = runHat;
$("d-go").onclick = runDet;
runFlow(); runHat(); runDet();
