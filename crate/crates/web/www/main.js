import init, { runCloudBandit, regretCurves, savingsCurve } from "./pkg/mcopt_web.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"];
const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function escape(s) {
  return String(s).replace(/[&<>"]/g, (c) => ({ "&": "&amp;", "<": "&lt;", ">": "&gt;", '"': "&quot;" })[c]);
}

// Line chart. series: [{ name, points: [[x, y], ...], dashed }]
function lineChart(series, xLabel, yLabel) {
  const w = 720, h = 320, m = { l: 60, r: 170, t: 15, b: 40 };
  const all = series.flatMap((s) => s.points);
  if (all.length === 0) return "";
  let [x0, x1] = [Math.min(...all.map((p) => p[0])), Math.max(...all.map((p) => p[0]))];
  let [y0, y1] = [Math.min(0, ...all.map((p) => p[1])), Math.max(...all.map((p) => p[1]))];
  if (x0 === x1) x1 = x0 + 1;
  if (y0 === y1) y1 = y0 + 1;
  const sx = (x) => m.l + ((x - x0) / (x1 - x0)) * (w - m.l - m.r);
  const sy = (y) => h - m.b - ((y - y0) / (y1 - y0)) * (h - m.t - m.b);
  let svg = `<svg width="${w}" height="${h}">`;
  svg += `<line x1="${m.l}" y1="${sy(0)}" x2="${w - m.r}" y2="${sy(0)}" stroke="#bbb"/>`;
  for (let i = 0; i <= 4; i++) {
    const y = y0 + ((y1 - y0) * i) / 4;
    svg += `<text x="${m.l - 6}" y="${sy(y) + 4}" text-anchor="end" font-size="11">${y.toPrecision(3)}</text>`;
    const x = x0 + ((x1 - x0) * i) / 4;
    svg += `<text x="${sx(x)}" y="${h - m.b + 16}" text-anchor="middle" font-size="11">${+x.toPrecision(3)}</text>`;
  }
  svg += `<text x="${(m.l + w - m.r) / 2}" y="${h - 5}" text-anchor="middle" font-size="12">${xLabel}</text>`;
  svg += `<text x="12" y="${h / 2}" transform="rotate(-90 12 ${h / 2})" text-anchor="middle" font-size="12">${yLabel}</text>`;
  series.forEach((s, i) => {
    const c = COLORS[i % COLORS.length];
    const pts = s.points.map((p) => `${sx(p[0])},${sy(p[1])}`).join(" ");
    svg += `<polyline fill="none" stroke="${c}" stroke-width="2" ${s.dashed ? 'stroke-dasharray="5 4"' : ""} points="${pts}"/>`;
    const ly = m.t + 16 * i + 8;
    svg += `<line x1="${w - m.r + 10}" y1="${ly}" x2="${w - m.r + 30}" y2="${ly}" stroke="${c}" stroke-width="2" ${s.dashed ? 'stroke-dasharray="5 4"' : ""}/>`;
    svg += `<text x="${w - m.r + 35}" y="${ly + 4}" font-size="12">${escape(s.name)}</text>`;
  });
  return svg + "</svg>";
}

function guard(outId, f) {
  try {
    f();
  } catch (e) {
    $(outId).innerHTML = `<p class="error">${escape(e)}</p>`;
  }
}

function showCloudBandit() {
  guard("cb-out", () => {
    const r = JSON.parse(
      runCloudBandit($("cb-scenario").value, $("cb-target").value, $("cb-opt").value, num("cb-b1"), num("cb-eta"), num("cb-seed")),
    );
    const byArm = new Map();
    for (const s of r.steps) {
      if (!byArm.has(s.provider)) byArm.set(s.provider, []);
      byArm.get(s.provider).push([s.step, s.best]);
    }
    const series = [...byArm].map(([name, points]) => ({ name, points }));
    series.push({ name: "true minimum", points: [[1, r.fstar], [Math.max(...r.steps.map((s) => s.step)), r.fstar]], dashed: true });
    let html = `<p>chosen <b>${escape(r.chosen_provider)}</b> ${escape(r.chosen_config)} n=${r.chosen_nodes},
      loss ${r.loss.toPrecision(5)} (regret ${((r.loss - r.fstar) / r.fstar).toPrecision(3)}), ${r.total_evals} evaluations</p>`;
    html += "<table><tr><th>provider</th><th>pulls</th><th>best</th><th>eliminated after round</th></tr>";
    for (const a of r.arms) {
      html += `<tr><td>${escape(a.provider)}</td><td>${a.pulls}</td><td>${a.best_value?.toPrecision(5) ?? "-"}</td><td>${a.eliminated_round ?? "survivor"}</td></tr>`;
    }
    html += "</table>";
    $("cb-out").innerHTML = html + lineChart(series, "evaluations on arm", "best value so far");
  });
}

function showRegret() {
  guard("rg-out", () => {
    const r = JSON.parse(
      regretCurves($("rg-scenario").value, $("rg-target").value, $("rg-algos").value, $("rg-budgets").value, num("rg-seeds"), num("rg-seed")),
    );
    const byAlgo = new Map();
    for (const s of r.summaries) {
      if (!byAlgo.has(s.algorithm)) byAlgo.set(s.algorithm, []);
      byAlgo.get(s.algorithm).push([s.budget, s.stats.median]);
    }
    const series = [...byAlgo].map(([name, points]) => ({ name: `${name} (median)`, points }));
    series.push({ name: "rs (expected)", points: r.rs_expected.map((p) => [p.budget, p.regret]), dashed: true });
    $("rg-out").innerHTML = lineChart(series, "budget", "regret");
  });
}

function showSavings() {
  guard("sv-out", () => {
    const r = JSON.parse(
      savingsCurve($("sv-scenario").value, $("sv-target").value, $("sv-algos").value, num("sv-budget"), num("sv-seeds"), num("sv-n"), num("sv-seed")),
    );
    const series = r.series.map((s) => ({ name: s.algorithm, points: s.points.map((p) => [p.n, p.median]) }));
    $("sv-out").innerHTML = lineChart(series, "production runs N", "median savings S");
  });
}

await init();
$("cb-run").addEventListener("click", showCloudBandit);
$("rg-run").addEventListener("click", showRegret);
$("sv-run").addEventListener("click", showSavings);
showCloudBandit();
