import init, { threshold_curves, spectrum_demo, denoise_demo } from "./pkg/elma_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

// Draws each series as a polyline in a shared box with light axes.
function plot(canvas, series, xr, yr) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const px = (x) => ((x - xr[0]) / (xr[1] - xr[0])) * (w - 20) + 10;
  const py = (y) => h - 10 - ((y - yr[0]) / (yr[1] - yr[0])) * (h - 20);
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#ddd";
  ctx.beginPath();
  if (xr[0] < 0 && xr[1] > 0) { ctx.moveTo(px(0), 0); ctx.lineTo(px(0), h); }
  if (yr[0] < 0 && yr[1] > 0) { ctx.moveTo(0, py(0)); ctx.lineTo(w, py(0)); }
  ctx.stroke();
  for (const { xs, ys, color } of series) {
    ctx.strokeStyle = color;
    ctx.lineWidth = 2;
    ctx.beginPath();
    let pen = false;
    xs.forEach((x, i) => {
      const y = ys[i];
      if (!Number.isFinite(y)) { pen = false; return; }
      pen ? ctx.lineTo(px(x), py(y)) : ctx.moveTo(px(x), py(y));
      pen = true;
    });
    ctx.stroke();
  }
}

function drawCurves() {
  const lambda = num("c-lambda");
  const afrac = num("c-afrac");
  $("c-afrac-v").textContent = afrac.toFixed(2);
  const span = Math.max(4 * lambda, 2 / Math.max(1 - afrac, 0.05) * lambda);
  try {
    const c = threshold_curves($("c-family").value, lambda, afrac, num("c-p"), -span, span, span / 300);
    const x = Array.from(c.x);
    plot($("c-plot"), [
      { xs: x, ys: x, color: "#bbb" },
      { xs: x, ys: Array.from(c.phi), color: "#36c" },
      { xs: x, ys: Array.from(c.theta), color: "#c33" },
    ], [-span, span], [-span, span]);
    $("c-msg").textContent = "";
  } catch (e) {
    $("c-msg").textContent = String(e.message ?? e);
  }
}

function runSpectrum() {
  try {
    const r = spectrum_demo(num("s-m"), num("s-n"), num("s-k"), num("s-sigma"),
      num("s-bf"), num("s-bs"), 0.6, BigInt(num("s-seed")));
    const sin = Array.from(r.sigma_in);
    const idx = sin.map((_, i) => i + 1);
    plot($("s-plot"), [
      { xs: idx, ys: sin, color: "#999" },
      { xs: idx, ys: Array.from(r.sigma_soft), color: "#36c" },
      { xs: idx, ys: Array.from(r.sigma_firm), color: "#c33" },
    ], [1, sin.length], [0, sin[0] * 1.05]);
    const count = (v) => Array.from(v).filter((s) => s > 0).length;
    $("s-msg").textContent =
      `RSE noisy ${r.rse_noisy.toFixed(4)}\n` +
      `RSE firm  ${r.rse_firm.toFixed(4)}  rank ${count(r.sigma_firm)}\n` +
      `RSE soft  ${r.rse_soft.toFixed(4)}  rank ${count(r.sigma_soft)}`;
  } catch (e) {
    $("s-msg").textContent = String(e.message ?? e);
  }
}

let clean = null;

function showGray(canvas, pixels, w, h) {
  canvas.width = w;
  canvas.height = h;
  canvas.style.width = `${2 * w}px`;
  const img = new ImageData(w, h);
  pixels.forEach((v, i) => img.data.set([v, v, v, 255], 4 * i));
  canvas.getContext("2d").putImageData(img, 0, 0);
}

// Piecewise-smooth default picture so the page works without an upload.
function defaultImage(w = 96, h = 96) {
  const px = new Uint8Array(w * h);
  for (let r = 0; r < h; r++) {
    for (let c = 0; c < w; c++) {
      let v = 110 + 50 * Math.sin(2 * Math.PI * r / 32) * Math.cos(2 * Math.PI * c / 48);
      if ((Math.floor(r / 24) + Math.floor(c / 24)) % 3 === 0) v += 60;
      if (r + c < 0.6 * w) v -= 40;
      px[r * w + c] = Math.max(0, Math.min(255, Math.round(v)));
    }
  }
  return { px, w, h };
}

function setClean(img) {
  clean = img;
  showGray($("i-clean"), img.px, img.w, img.h);
}

function loadFile(file) {
  const url = URL.createObjectURL(file);
  const im = new Image();
  im.onload = () => {
    const scale = Math.min(1, 128 / Math.max(im.width, im.height));
    const w = Math.max(8, Math.round(im.width * scale));
    const h = Math.max(8, Math.round(im.height * scale));
    const cv = document.createElement("canvas");
    cv.width = w;
    cv.height = h;
    const ctx = cv.getContext("2d");
    ctx.drawImage(im, 0, 0, w, h);
    const rgba = ctx.getImageData(0, 0, w, h).data;
    const px = new Uint8Array(w * h);
    for (let i = 0; i < w * h; i++) {
      px[i] = Math.round(0.299 * rgba[4 * i] + 0.587 * rgba[4 * i + 1] + 0.114 * rgba[4 * i + 2]);
    }
    URL.revokeObjectURL(url);
    setClean({ px, w, h });
  };
  im.src = url;
}

function runDenoise() {
  $("i-msg").textContent = "working...";
  // Let the message paint before the synchronous wasm call.
  setTimeout(() => {
    try {
      const t = performance.now();
      const r = denoise_demo(clean.px, clean.w, clean.h, num("i-sigma"), $("i-method").value,
        num("i-beta"), BigInt(num("i-seed")));
      showGray($("i-noisy"), r.noisy, clean.w, clean.h);
      showGray($("i-out"), r.denoised, clean.w, clean.h);
      $("i-msg").textContent = `PSNR noisy ${r.psnr_noisy.toFixed(2)} dB, denoised ${r.psnr_denoised.toFixed(2)} dB ` +
        `(${((performance.now() - t) / 1000).toFixed(1)} s)`;
    } catch (e) {
      $("i-msg").textContent = String(e.message ?? e);
    }
  }, 20);
}

await init();
for (const id of ["c-family", "c-lambda", "c-afrac", "c-p"]) $(id).addEventListener("input", drawCurves);
$("s-run").addEventListener("click", runSpectrum);
$("i-run").addEventListener("click", runDenoise);
$("i-file").addEventListener("change", (e) => e.target.files[0] && loadFile(e.target.files[0]));
setClean(defaultImage());
drawCurves();
runSpectrum();
