/**
 * One renderer per table.  Each takes a validated Table and returns a
 * complete SVG document string; the figure kind names the visual
 * grammar shared with the producer's manifest.
 */

import { extent, max } from "d3-array";
import { scaleLinear, scaleLog } from "d3-scale";
import {
  Table, bool, frac, num, optNum, str,
} from "./schema.js";
import {
  PALETTE, el, fmt, legend, plotFrame, polyline, svgDoc, text, xAxis, yAxis,
} from "./svg.js";

export type FigureKind =
  | "ratio-curve" | "loglog-decay" | "heatmap" | "growth-curve";

export const KIND_BY_TABLE: Record<Table["name"], FigureKind> = {
  gallagher: "growth-curve",
  ratios: "ratio-curve",
  dyadic: "growth-curve",
  decay: "loglog-decay",
  qi_pairs: "heatmap",
  qi_sums: "growth-curve",
  qi_plateaus: "ratio-curve",
};

function pad([lo, hi]: [number, number], f = 0.08): [number, number] {
  const span = hi - lo || Math.abs(hi) || 1;
  return [lo - f * span, hi + f * span];
}

function bounded(lo: number, hi: number): (v: number) => boolean {
  return (v) => v >= lo && v <= hi;
}

/** Per-modulus ratio with error bars against the unit line; dashed
 * curves mark one envelope unit where the producer supplied one. */
function ratiosFigure(t: Table): string {
  const rows = t.rows.map((r, i) => ({
    n: num(t, r, "n", i),
    ratio: num(t, r, "ratio", i),
    se: num(t, r, "se", i),
    env: optNum(t, r, "envelope", i),
    measure: str(t, r, "measure", i),
  }));
  const frame = plotFrame();
  const x = scaleLog().base(2)
    .domain(extent(rows, (r) => r.n) as [number, number])
    .range([frame.x0, frame.x1]);
  const y = scaleLinear()
    .domain(pad(extent(
      rows.flatMap((r) => [r.ratio - r.se, r.ratio + r.se, 1]),
    ) as [number, number]))
    .range([frame.y0, frame.y1]);
  const inY = bounded(y.domain()[0]!, y.domain()[1]!);
  const parts = [
    xAxis(frame, x, "modulus n"),
    yAxis(frame, y, "mu(f_n) / lambda(f_n)"),
    el("line", {
      x1: frame.x0, y1: y(1), x2: frame.x1, y2: y(1),
      stroke: "#888", "stroke-width": 1, "stroke-dasharray": "2 3",
    }),
  ];
  for (const band of [-1, 1]) {
    const pts = rows.filter((r) => r.env !== null && inY(1 + band * r.env!))
      .map((r) => [x(r.n), y(1 + band * r.env!)] as [number, number]);
    if (pts.length > 1) {
      parts.push(polyline(pts, {
        stroke: "#5a9a62", "stroke-width": 1, "stroke-dasharray": "5 3",
      }));
    }
  }
  for (const r of rows) {
    const cx = x(r.n);
    parts.push(el("line", {
      x1: cx, y1: y(r.ratio - r.se), x2: cx, y2: y(r.ratio + r.se),
      stroke: PALETTE[0]!, "stroke-width": 1,
    }));
    parts.push(el("circle", {
      cx, cy: y(r.ratio), r: 2, fill: PALETTE[0]!,
    }));
  }
  const caption = `measure ${rows[0]!.measure} · ${rows.length} moduli · `
    + `dashed green: one envelope unit around 1`;
  return svgDoc(`ratios · ${t.configHash}`, caption, parts.join("\n"));
}

/** Plateau sweep of the functional constant falling toward one. */
function plateausFigure(t: Table): string {
  const rows = t.rows.map((r, i) => ({
    plateau: num(t, r, "plateau", i),
    fitted: num(t, r, "fitted_c", i),
    observed: num(t, r, "observed_max", i),
    ok: bool(t, r, "setwise_ok", i),
  }));
  const frame = plotFrame();
  const x = scaleLinear()
    .domain(pad(extent(rows, (r) => r.plateau) as [number, number]))
    .range([frame.x0, frame.x1]);
  const y = scaleLinear()
    .domain(pad(extent(
      rows.flatMap((r) => [r.fitted, r.observed, 1]),
    ) as [number, number]))
    .range([frame.y0, frame.y1]);
  const parts = [
    xAxis(frame, x, "plateau"),
    yAxis(frame, y, "constant"),
    el("line", {
      x1: frame.x0, y1: y(1), x2: frame.x1, y2: y(1),
      stroke: "#888", "stroke-width": 1, "stroke-dasharray": "2 3",
    }),
    polyline(rows.map((r) => [x(r.plateau), y(r.fitted)]),
             { stroke: PALETTE[0]!, "stroke-width": 2 }),
    polyline(rows.map((r) => [x(r.plateau), y(r.observed)]),
             { stroke: PALETTE[1]!, "stroke-width": 2, "stroke-dasharray": "4 3" }),
    legend(frame, [["fitted_c", PALETTE[0]!], ["observed_max", PALETTE[1]!]]),
  ];
  for (const r of rows) {
    parts.push(el("circle", {
      cx: x(r.plateau), cy: y(r.fitted), r: 3, fill: PALETTE[0]!,
    }));
  }
  const okAll = rows.every((r) => r.ok);
  const caption = `setwise check ${okAll ? "clean" : "VIOLATED"} · `
    + `fitted_c ${rows.map((r) => fmt(r.fitted)).join(" > ")}`;
  return svgDoc(`qi_plateaus · ${t.configHash}`, caption, parts.join("\n"));
}

/** Hit counts per sampled point across horizons, log-x. */
function gallagherFigure(t: Table): string {
  const rows = t.rows.map((r, i) => ({
    point: str(t, r, "point_id", i),
    horizon: num(t, r, "horizon", i),
    hits: num(t, r, "hits", i),
  }));
  const series = new Map<string, Array<[number, number]>>();
  for (const r of rows) {
    if (!series.has(r.point)) series.set(r.point, []);
    series.get(r.point)!.push([r.horizon, r.hits]);
  }
  const frame = plotFrame();
  const x = scaleLog()
    .domain(extent(rows, (r) => r.horizon) as [number, number])
    .range([frame.x0, frame.x1]);
  const y = scaleLinear()
    .domain(pad([0, max(rows, (r) => r.hits)!]))
    .range([frame.y0, frame.y1]);
  const parts = [
    xAxis(frame, x, "horizon N"),
    yAxis(frame, y, "hits up to N"),
  ];
  let i = 0;
  for (const [, pts] of [...series.entries()].sort(
    (a, b) => Number(a[0]) - Number(b[0]),
  )) {
    const color = PALETTE[i % PALETTE.length]!;
    parts.push(polyline(pts.map(([h, v]) => [x(h), y(v)]),
                        { stroke: color, "stroke-width": 1.5, opacity: 0.8 }));
    i += 1;
  }
  const caption = `${series.size} sample points · counts are cumulative in N`;
  return svgDoc(`gallagher · ${t.configHash}`, caption, parts.join("\n"));
}

/** Partial-sum expectation ratio and variance excess across dyadic N. */
function dyadicFigure(t: Table): string {
  const rows = t.rows.map((r, i) => ({
    N: num(t, r, "N", i),
    etp: num(t, r, "etp_ratio", i),
    vtp: num(t, r, "vtp_excess", i),
    measure: str(t, r, "measure", i),
  }));
  const frame = plotFrame();
  const x = scaleLog().base(2)
    .domain(extent(rows, (r) => r.N) as [number, number])
    .range([frame.x0, frame.x1]);
  const y = scaleLinear()
    .domain(pad(extent(
      rows.flatMap((r) => [r.etp, r.vtp, 0, 1]),
    ) as [number, number]))
    .range([frame.y0, frame.y1]);
  const parts = [
    xAxis(frame, x, "checkpoint N"),
    yAxis(frame, y, "value"),
    el("line", {
      x1: frame.x0, y1: y(1), x2: frame.x1, y2: y(1),
      stroke: "#888", "stroke-width": 1, "stroke-dasharray": "2 3",
    }),
    el("line", {
      x1: frame.x0, y1: y(0), x2: frame.x1, y2: y(0),
      stroke: "#bbb", "stroke-width": 1, "stroke-dasharray": "2 3",
    }),
    polyline(rows.map((r) => [x(r.N), y(r.etp)]),
             { stroke: PALETTE[0]!, "stroke-width": 2 }),
    polyline(rows.map((r) => [x(r.N), y(r.vtp)]),
             { stroke: PALETTE[1]!, "stroke-width": 2 }),
    legend(frame, [["etp_ratio", PALETTE[0]!], ["vtp_excess", PALETTE[1]!]]),
  ];
  for (const r of rows) {
    parts.push(el("circle", { cx: x(r.N), cy: y(r.etp), r: 3, fill: PALETTE[0]! }));
    parts.push(el("circle", { cx: x(r.N), cy: y(r.vtp), r: 3, fill: PALETTE[1]! }));
  }
  const caption = `measure ${rows[0]!.measure} · ratio near 1 and excess near 0 `
    + `mean both moments transfer`;
  return svgDoc(`dyadic · ${t.configHash}`, caption, parts.join("\n"));
}

/** Aggregate overlap ratio (lhs - E^2)/E across checkpoints. */
function sumsFigure(t: Table): string {
  const rows = t.rows.map((r, i) => ({
    N: num(t, r, "N", i),
    lhs: frac(t, r, "lhs", i),
    expectation: frac(t, r, "expectation", i),
    ratio: num(t, r, "ratio", i),
  }));
  const frame = plotFrame();
  const x = scaleLinear()
    .domain(pad(extent(rows, (r) => r.N) as [number, number]))
    .range([frame.x0, frame.x1]);
  const y = scaleLinear()
    .domain(pad(extent(rows.flatMap((r) => [r.ratio, 0])) as [number, number]))
    .range([frame.y0, frame.y1]);
  const parts = [
    xAxis(frame, x, "checkpoint N"),
    yAxis(frame, y, "(lhs - E^2) / E"),
    el("line", {
      x1: frame.x0, y1: y(0), x2: frame.x1, y2: y(0),
      stroke: "#888", "stroke-width": 1, "stroke-dasharray": "2 3",
    }),
    polyline(rows.map((r) => [x(r.N), y(r.ratio)]),
             { stroke: PALETTE[0]!, "stroke-width": 2 }),
  ];
  for (const r of rows) {
    parts.push(el("circle", { cx: x(r.N), cy: y(r.ratio), r: 3, fill: PALETTE[0]! }));
  }
  const last = rows[rows.length - 1]!;
  const caption = `E at final N: ${fmt(last.expectation)} · `
    + `bounded ratio backs summed quasi-independence`;
  return svgDoc(`qi_sums · ${t.configHash}`, caption, parts.join("\n"));
}

/** Fourier magnitude against radius, log-log, one series per probed
 * direction, with the fitted-slope reference line. */
function decayFigure(t: Table): string {
  const rows = t.rows.map((r, i) => ({
    radius: num(t, r, "radius", i),
    direction: str(t, r, "direction", i),
    magnitude: num(t, r, "magnitude", i),
    sigma: num(t, r, "sigma", i),
    stderr: num(t, r, "stderr", i),
  }));
  const positive = rows.filter((r) => r.magnitude > 0);
  if (positive.length === 0) {
    throw new Error("decay.csv: all magnitudes are zero, nothing to plot");
  }
  const frame = plotFrame();
  const x = scaleLog()
    .domain(extent(positive, (r) => r.radius) as [number, number])
    .range([frame.x0, frame.x1]);
  const y = scaleLog()
    .domain(extent(positive, (r) => r.magnitude) as [number, number])
    .range([frame.y0, frame.y1]);
  const series = new Map<string, Array<[number, number]>>();
  for (const r of positive) {
    if (!series.has(r.direction)) series.set(r.direction, []);
    series.get(r.direction)!.push([r.radius, r.magnitude]);
  }
  const logFmt = (v: number) => {
    const e = Math.log10(v);
    return Number.isInteger(e) ? `1e${e}` : fmt(v);
  };
  const parts = [
    xAxis(frame, x, "frequency radius", logFmt),
    yAxis(frame, y, "|mu^(xi)|", logFmt),
  ];
  let i = 0;
  for (const [, pts] of [...series.entries()].sort(
    (a, b) => a[0].localeCompare(b[0]),
  )) {
    pts.sort((a, b) => a[0] - b[0]);
    const color = PALETTE[i % PALETTE.length]!;
    for (const [r, m] of pts) {
      parts.push(el("circle", { cx: x(r), cy: y(m), r: 2, fill: color, opacity: 0.8 }));
    }
    parts.push(polyline(pts.map(([r, m]) => [x(r), y(m)]),
                        { stroke: color, "stroke-width": 1, opacity: 0.5 }));
    i += 1;
  }
  const sigma = rows[0]!.sigma;
  const [r0, r1] = x.domain() as [number, number];
  const mTop = y.domain()[1]!;
  const ref: Array<[number, number]> = [
    [r0, mTop], [r1, mTop * (r1 / r0) ** -sigma],
  ];
  parts.push(polyline(ref.map(([r, m]) => [x(r), y(m)]), {
    stroke: "#222", "stroke-width": 1, "stroke-dasharray": "6 3",
  }));
  const caption = `${series.size} directions · fitted sigma ${fmt(sigma)} `
    + `± ${fmt(rows[0]!.stderr)} · dashed: radius^-sigma reference`;
  return svgDoc(`decay · ${t.configHash}`, caption, parts.join("\n"));
}

/** Per-pair constants on the (n, n') grid, worst shift per cell. */
function pairsFigure(t: Table): string {
  const rows = t.rows.map((r, i) => ({
    n: num(t, r, "n", i),
    nprime: num(t, r, "nprime", i),
    gcd: num(t, r, "gcd", i),
    volume: frac(t, r, "volume", i),
    constant: num(t, r, "constant", i),
  }));
  const cells = new Map<string, { n: number; np: number; c: number }>();
  for (const r of rows) {
    const key = `${r.n},${r.nprime}`;
    const prev = cells.get(key);
    if (!prev || r.constant > prev.c) {
      cells.set(key, { n: r.n, np: r.nprime, c: r.constant });
    }
  }
  const ns = [...new Set(rows.map((r) => r.n))].sort((a, b) => a - b);
  const nps = [...new Set(rows.map((r) => r.nprime))].sort((a, b) => a - b);
  const frame = plotFrame();
  const cw = (frame.x1 - frame.x0) / ns.length;
  const ch = (frame.y0 - frame.y1) / nps.length;
  const cmax = max([...cells.values()], (c) => c.c)!;
  const shade = (v: number) => {
    // white to deep blue, fixed endpoints
    const f = cmax > 0 ? v / cmax : 0;
    const mix = (a: number, b: number) => Math.round(a + (b - a) * f);
    return `rgb(${mix(255, 42)},${mix(255, 111)},${mix(255, 151)})`;
  };
  const parts: string[] = [];
  for (const { n, np, c } of [...cells.values()].sort(
    (a, b) => a.n - b.n || a.np - b.np,
  )) {
    const xi = ns.indexOf(n);
    const yi = nps.indexOf(np);
    parts.push(el("rect", {
      x: frame.x0 + xi * cw,
      y: frame.y0 - (yi + 1) * ch,
      width: cw, height: ch,
      fill: shade(c), stroke: "#ffffff", "stroke-width": 0.5,
    }));
  }
  const step = Math.max(1, Math.ceil(ns.length / 12));
  ns.forEach((n, i2) => {
    if (i2 % step !== 0) return;
    parts.push(text(frame.x0 + (i2 + 0.5) * cw, frame.y0 + 16, String(n),
                    { "text-anchor": "middle", "font-size": 10 }));
  });
  nps.forEach((np, i2) => {
    if (i2 % step !== 0) return;
    parts.push(text(frame.x0 - 8, frame.y0 - (i2 + 0.5) * ch + 4, String(np),
                    { "text-anchor": "end", "font-size": 10 }));
  });
  parts.push(text((frame.x0 + frame.x1) / 2, frame.y0 + 34, "n",
                  { "text-anchor": "middle" }));
  parts.push(el("g", {
    transform: `translate(16 ${(frame.y0 + frame.y1) / 2}) rotate(-90)`,
  }, text(0, 0, "n'", { "text-anchor": "middle" })));
  const caption = `${cells.size} pairs · cell: worst per-shift constant · `
    + `global max ${fmt(cmax)}`;
  return svgDoc(`qi_pairs · ${t.configHash}`, caption, parts.join("\n"));
}

export function renderFigure(t: Table): string {
  switch (t.name) {
    case "ratios": return ratiosFigure(t);
    case "qi_plateaus": return plateausFigure(t);
    case "gallagher": return gallagherFigure(t);
    case "dyadic": return dyadicFigure(t);
    case "qi_sums": return sumsFigure(t);
    case "decay": return decayFigure(t);
    case "qi_pairs": return pairsFigure(t);
  }
}
