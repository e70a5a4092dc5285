import init, { portrait, overlap, fit, classify, fixed_point } from "./pkg/qtop_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

let series = null;
let fitted = null;

function drawPortrait(x, y, z, color) {
  const c = $("portrait");
  const g = c.getContext("2d");
  const pts = portrait(x, y, z, num("p-alpha"), num("p-n"));
  const s = c.width / 4;
  g.fillStyle = color;
  for (let i = 0; i < pts.length; i += 2) {
    g.fillRect(c.width / 2 + pts[i] * s, c.height / 2 - pts[i + 1] * s, 1, 1);
  }
}

function clearPortrait() {
  const c = $("portrait");
  c.getContext("2d").clearRect(0, 0, c.width, c.height);
}

// invert the projection on the y > 0 hemisphere
function pickPoint(ev) {
  const c = $("portrait");
  const r = c.getBoundingClientRect();
  const s = c.width / 4;
  const px = (ev.clientX - r.left - c.width / 2) / s;
  const pz = -(ev.clientY - r.top - c.height / 2) / s;
  const rho2 = px * px + pz * pz;
  if (rho2 >= 2) return null;
  const y = 1 - rho2 / 2;
  const k = Math.sqrt((1 + y) / 2);
  return [px * k, y, pz * k];
}

function drawOverlap() {
  const c = $("overlap");
  const g = c.getContext("2d");
  g.clearRect(0, 0, c.width, c.height);
  if (!series) return;
  const m = 40;
  const tMax = Math.log10(series.length - 1);
  const oMin = Math.min(-3, Math.floor(Math.log10(Math.max(1e-12, Math.min(...series)))));
  const sx = (t) => m + (Math.log10(t) / tMax) * (c.width - 2 * m);
  const sy = (o) => m + (Math.log10(o) / oMin) * (c.height - 2 * m);
  g.strokeStyle = "#999";
  g.strokeRect(m, m, c.width - 2 * m, c.height - 2 * m);
  g.fillStyle = "#333";
  g.fillText("log t", c.width - m - 30, c.height - 10);
  g.fillText(`log O (down to 1e${oMin})`, 5, 15);
  const line = (f, color) => {
    g.strokeStyle = color;
    g.beginPath();
    for (let t = 1; t < series.length; t++) {
      const o = f(t);
      if (!(o > 0)) continue;
      t === 1 ? g.moveTo(sx(t), sy(o)) : g.lineTo(sx(t), sy(o));
    }
    g.stroke();
  };
  line((t) => series[t], "#1f77b4");
  if (fitted) {
    const [q, tau] = fitted;
    line((t) => {
      const b = 1 + (q - 1) * (t / tau) ** 2;
      return b > 0 ? b ** (1 / (1 - q)) : 0;
    }, "#d62728");
  }
}

function runOverlap() {
  try {
    series = overlap(num("o-j"), 3, num("o-delta"), num("o-offset"), num("o-steps"));
    fitted = null;
    $("classify-out").textContent = "class: " + classify(series);
    $("fit-out").textContent = "";
  } catch (e) {
    $("classify-out").textContent = String(e);
  }
  drawOverlap();
}

function runFit() {
  if (!series) return;
  try {
    fitted = fit(series, num("f-lo"), num("f-hi"));
    const [q, tau, r2] = fitted;
    $("fit-out").textContent = `q_rel = ${q.toFixed(3)}, tau = ${tau.toFixed(1)}, R2 = ${r2.toFixed(4)}`;
  } catch (e) {
    fitted = null;
    $("fit-out").textContent = String(e);
  }
  drawOverlap();
}

await init();
const fp = fixed_point();
$("p-run").onclick = () => drawPortrait(0.6, 0.48, 0.64, "#1f77b4");
$("p-clear").onclick = clearPortrait;
$("portrait").onclick = (ev) => {
  const p = pickPoint(ev);
  if (p) drawPortrait(p[0], p[1], p[2], "#d62728");
};
$("o-run").onclick = runOverlap;
$("f-run").onclick = runFit;
drawPortrait(0.6, 0.48, 0.64, "#1f77b4");
drawPortrait(fp[0], fp[1], fp[2] - 0.05, "#2ca02c");
