import init, { simulate, segmentTable, sampleSegments } from "./pkg/stit_web.js";

const $ = (id) => document.getElementById(id);
const fmt = (x, d = 6) => (x === null || x === undefined ? "" : x.toFixed(d));

function fail(el, e) {
  el.innerHTML = `<p class="err">${e.message ?? e}</p>`;
}

function table(head, rows) {
  const th = head.map((h) => `<th>${h}</th>`).join("");
  const tr = rows.map((r) => `<tr>${r.map((c) => `<td>${c}</td>`).join("")}</tr>`).join("");
  return `<table><tr>${th}</tr>${tr}</table>`;
}

// orthographic view of the unit cube, rotated by yaw then pitch about its centre
const view = { yaw: 0.6, pitch: -0.45, data: null };

function project([x, y, z]) {
  const c = [x - 0.5, y - 0.5, z - 0.5];
  const cy = Math.cos(view.yaw), sy = Math.sin(view.yaw);
  const cp = Math.cos(view.pitch), sp = Math.sin(view.pitch);
  const x1 = cy * c[0] + sy * c[1];
  const y1 = -sy * c[0] + cy * c[1];
  const y2 = cp * y1 - sp * c[2];
  const z2 = sp * y1 + cp * c[2];
  const s = 300;
  return [280 + s * x1, 280 - s * z2, y2];
}

function draw() {
  const ctx = $("view").getContext("2d");
  ctx.clearRect(0, 0, 560, 560);
  const cube = [
    [0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0],
    [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1],
  ];
  const cubeEdges = [[0, 1], [1, 2], [2, 3], [3, 0], [4, 5], [5, 6], [6, 7], [7, 4], [0, 4], [1, 5], [2, 6], [3, 7]];
  ctx.strokeStyle = "#999";
  ctx.lineWidth = 1;
  for (const [a, b] of cubeEdges) {
    const p = project(cube[a]), q = project(cube[b]);
    ctx.beginPath();
    ctx.moveTo(p[0], p[1]);
    ctx.lineTo(q[0], q[1]);
    ctx.stroke();
  }
  const d = view.data;
  if (!d) return;
  const tmax = Math.max(...d.birth_times, 1e-9);
  d.polygons.forEach((flat, i) => {
    const shade = Math.round(200 - 170 * (d.birth_times[i] / tmax));
    ctx.strokeStyle = `rgb(${shade},${shade},${shade})`;
    ctx.beginPath();
    for (let k = 0; k < flat.length; k += 3) {
      const p = project([flat[k], flat[k + 1], flat[k + 2]]);
      if (k === 0) ctx.moveTo(p[0], p[1]);
      else ctx.lineTo(p[0], p[1]);
    }
    ctx.closePath();
    ctx.stroke();
  });
  for (const [pts, colour] of [[d.t_vertices, "#d33"], [d.x_vertices, "#26c"]]) {
    ctx.fillStyle = colour;
    for (const v of pts) {
      const p = project(v);
      ctx.beginPath();
      ctx.arc(p[0], p[1], 2.2, 0, 2 * Math.PI);
      ctx.fill();
    }
  }
}

function run() {
  try {
    const d = JSON.parse(simulate(Number($("time").value), Number($("seed").value), $("dirs").value));
    view.data = d;
    const nt = d.t_vertices.length, nx = d.x_vertices.length;
    const frac = nt + nx > 0 ? (nt / (nt + nx)).toFixed(3) : "";
    $("stats").innerHTML = table(
      ["", "count"],
      [
        ["cells", d.cells],
        ["I-polygons", d.polygons.length],
        ["I-segments", d.segments],
        ["edges", d.edges],
        ["T vertices", nt],
        ["X vertices", nx],
        ["T fraction", frac],
      ],
    );
    draw();
  } catch (e) {
    fail($("stats"), e);
  }
}

function segments() {
  try {
    const rows = JSON.parse(segmentTable(Number($("maxn").value)));
    $("segtable").innerHTML = table(
      ["n", "P(n interior vertices)", "T fraction given n"],
      rows.map((r) => [r.n, fmt(r.p_n), fmt(r.p_t_given_n)]),
    );
  } catch (e) {
    fail($("segtable"), e);
  }
}

function sample() {
  try {
    const c = JSON.parse(sampleSegments(Number($("draws").value), Number($("sseed").value)));
    const rows = c.rows.map((r) => [r.t_count, fmt(r.empirical), fmt(r.se), fmt(r.exact), ((r.empirical - r.exact) / r.se).toFixed(2)]);
    rows.push(["left fraction", fmt(c.left_fraction), fmt(c.left_fraction_se), fmt(0.5), ((c.left_fraction - 0.5) / c.left_fraction_se).toFixed(2)]);
    $("samples").innerHTML = table(["T vertices", "empirical", "se", "quadrature", "z"], rows);
  } catch (e) {
    fail($("samples"), e);
  }
}

let drag = null;
$("view").addEventListener("pointerdown", (e) => { drag = [e.clientX, e.clientY]; });
window.addEventListener("pointerup", () => { drag = null; });
window.addEventListener("pointermove", (e) => {
  if (!drag) return;
  view.yaw += (e.clientX - drag[0]) * 0.01;
  view.pitch = Math.max(-1.5, Math.min(1.5, view.pitch + (e.clientY - drag[1]) * 0.01));
  drag = [e.clientX, e.clientY];
  draw();
});

await init();
$("run").onclick = run;
$("table").onclick = segments;
$("sample").onclick = sample;
run();
