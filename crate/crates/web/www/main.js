import init, { energy_levels, plane_map, cycle_json } from "./pkg/qtm_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);

function machine() {
  return { cycle: $("cycle").value, g: num("g"), r: num("r"), tc: num("tc"), th: num("th") };
}

function report(err) {
  $("cycle-out").textContent = "error: " + err;
}

function drawLevels() {
  const m = machine();
  const samples = 200;
  let v;
  try {
    v = energy_levels(m.g, m.r, num("wmax"), samples);
  } catch (e) {
    return report(e);
  }
  const cv = $("levels-canvas");
  const ctx = cv.getContext("2d");
  ctx.clearRect(0, 0, cv.width, cv.height);
  let lo = Infinity, hi = -Infinity;
  for (let k = 0; k < samples; k++) {
    for (let j = 1; j < 5; j++) {
      lo = Math.min(lo, v[5 * k + j]);
      hi = Math.max(hi, v[5 * k + j]);
    }
  }
  const wmax = v[5 * (samples - 1)];
  const px = (w) => 30 + (w / wmax) * (cv.width - 40);
  const py = (e) => cv.height - 20 - ((e - lo) / (hi - lo || 1)) * (cv.height - 30);
  const colors = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"];
  for (let j = 1; j < 5; j++) {
    ctx.strokeStyle = colors[j - 1];
    ctx.beginPath();
    for (let k = 0; k < samples; k++) {
      const x = px(v[5 * k]), y = py(v[5 * k + j]);
      k ? ctx.lineTo(x, y) : ctx.moveTo(x, y);
    }
    ctx.stroke();
    ctx.fillStyle = colors[j - 1];
    ctx.fillText("E" + j, cv.width - 18, py(v[5 * (samples - 1) + j]) + 4);
  }
  ctx.strokeStyle = "#000";
  ctx.strokeRect(30, 10, cv.width - 40, cv.height - 30);
  ctx.fillStyle = "#000";
  ctx.fillText("0", 28, cv.height - 6);
  ctx.fillText("ω = " + wmax, cv.width - 60, cv.height - 6);
}

let window_ = null;

function drawMap() {
  const m = machine();
  const n = Math.max(2, Math.round(num("n")));
  const lo = num("lo"), hi = num("hi");
  let rgba;
  try {
    rgba = plane_map(m.cycle, m.g, m.r, m.tc, m.th, lo, hi, n, $("layer").value);
  } catch (e) {
    return report(e);
  }
  const off = document.createElement("canvas");
  off.width = off.height = n;
  off.getContext("2d").putImageData(new ImageData(new Uint8ClampedArray(rgba), n, n), 0, 0);
  const cv = $("map-canvas");
  const ctx = cv.getContext("2d");
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(off, 0, 0, cv.width, cv.height);
  window_ = { lo, hi };
}

function runCycle() {
  const m = machine();
  try {
    const out = JSON.parse(cycle_json(m.cycle, m.g, m.r, m.tc, m.th, num("w0"), num("w1")));
    $("cycle-out").textContent = JSON.stringify(out, null, 2);
  } catch (e) {
    report(e);
  }
}

$("map-canvas").addEventListener("click", (ev) => {
  if (!window_) return;
  const cv = ev.currentTarget;
  const rect = cv.getBoundingClientRect();
  const fx = (ev.clientX - rect.left) / rect.width;
  const fy = 1 - (ev.clientY - rect.top) / rect.height;
  const span = window_.hi - window_.lo;
  $("w0").value = (window_.lo + fx * span).toFixed(3);
  $("w1").value = (window_.lo + fy * span).toFixed(3);
  runCycle();
});

await init();
$("levels").onclick = drawLevels;
$("map").onclick = drawMap;
$("run").onclick = runCycle;
drawLevels();
drawMap();
runCycle();
