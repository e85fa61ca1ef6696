import init, { matchDemo, matrixDemo, bernoulliDemo } from "./pkg/gm_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function parse(json, out) {
  const data = JSON.parse(json);
  if (data.error) {
    out.textContent = `Error: ${data.error}`;
    return null;
  }
  return data;
}

function axes(ctx, w, h, pad) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#000";
  ctx.beginPath();
  ctx.moveTo(pad, pad);
  ctx.lineTo(pad, h - pad);
  ctx.lineTo(w - pad, h - pad);
  ctx.stroke();
}

function drawTrajectory(data) {
  const canvas = $("m-canvas");
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 36;
  axes(ctx, w, h, pad);
  const steps = Math.max(data.accuracy.length - 1, 1);
  const x = (k) => pad + (k / steps) * (w - 2 * pad);
  const y = (a) => h - pad - a * (h - 2 * pad);
  ctx.fillStyle = "#000";
  ctx.font = "12px sans-serif";
  ctx.fillText("1", pad - 14, y(1) + 4);
  ctx.fillText("0", pad - 14, y(0) + 4);
  ctx.fillText("iteration", w / 2 - 20, h - 8);
  ctx.fillText(String(steps), x(steps) - 4, h - pad + 14);
  ctx.strokeStyle = "#1f77b4";
  ctx.lineWidth = 2;
  ctx.beginPath();
  data.accuracy.forEach((a, k) => (k === 0 ? ctx.moveTo(x(k), y(a)) : ctx.lineTo(x(k), y(a))));
  ctx.stroke();
  ctx.fillStyle = "#d62728";
  ctx.beginPath();
  ctx.arc(x(steps), y(data.final_accuracy), 4, 0, 2 * Math.PI);
  ctx.fill();
}

function runMatch() {
  const out = $("m-out");
  const data = parse(matchDemo(num("m-n"), num("m-p"), num("m-r"), num("m-s"), num("m-seed")), out);
  if (!data) return;
  out.textContent =
    `${data.iterations} iterations; accuracy of the rounded matching ${data.final_accuracy.toFixed(3)} ` +
    `(red dot); line shows trace(D)/n per iterate.`;
  drawTrajectory(data);
}

function color(t) {
  const v = Math.round(255 * (1 - t));
  return `rgb(${v},${v},255)`;
}

function runMatrix() {
  const out = $("d-out");
  const data = parse(matrixDemo($("d-kind").value, num("d-n"), num("d-s"), num("d-seed")), out);
  if (!data) return;
  out.textContent = `${data.label}; trace ${data.trace.toFixed(3)}, largest entry ${data.max_entry.toFixed(3)}.`;
  const canvas = $("d-canvas");
  const ctx = canvas.getContext("2d");
  const cell = canvas.width / data.n;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  for (let i = 0; i < data.n; i++) {
    for (let j = 0; j < data.n; j++) {
      ctx.fillStyle = color(data.entries[i * data.n + j] / (data.max_entry || 1));
      ctx.fillRect(j * cell, i * cell, Math.ceil(cell), Math.ceil(cell));
    }
  }
}

function runBernoulli() {
  const out = $("b-out");
  const data = parse(bernoulliDemo(num("b-lambda"), num("b-rho"), num("b-draws"), 7), out);
  if (!data) return;
  out.textContent = "Grey bars: exact joint table. Blue bars: observed frequencies.";
  const canvas = $("b-canvas");
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 30;
  axes(ctx, w, h, pad);
  const labels = ["(1,1)", "(1,0)", "(0,1)", "(0,0)"];
  const slot = (w - 2 * pad) / 4;
  const y = (p) => h - pad - p * (h - 2 * pad);
  ctx.font = "12px sans-serif";
  labels.forEach((label, k) => {
    const x0 = pad + k * slot + slot * 0.15;
    ctx.fillStyle = "#999";
    ctx.fillRect(x0, y(data.expected[k]), slot * 0.3, y(0) - y(data.expected[k]));
    ctx.fillStyle = "#1f77b4";
    ctx.fillRect(x0 + slot * 0.35, y(data.observed[k]), slot * 0.3, y(0) - y(data.observed[k]));
    ctx.fillStyle = "#000";
    ctx.fillText(label, x0 + slot * 0.15, h - pad + 14);
  });
  ctx.fillText("1", pad - 14, y(1) + 4);
}

await init();
$("m-run").addEventListener("click", runMatch);
$("d-run").addEventListener("click", runMatrix);
$("b-run").addEventListener("click", runBernoulli);
runMatch();
runMatrix();
runBernoulli();
