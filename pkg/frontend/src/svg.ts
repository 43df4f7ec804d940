/**
 * String-level SVG assembly with a fixed style sheet.
 *
 * Everything is a pure function of its inputs: fixed canvas, fixed
 * palette, fixed fonts, and a shortest-roundtrip number format, so a
 * re-render of the same table is byte-identical.
 */

export const WIDTH = 640;
export const HEIGHT = 420;
export const MARGIN = { top: 44, right: 28, bottom: 52, left: 68 };

export const PALETTE = [
  "#2a6f97", "#c94d4d", "#5a9a62", "#7b5aa6", "#c78a33",
  "#527787", "#9a5a84", "#6b6b6b",
];

export const FONT = "Helvetica, Arial, sans-serif";

/** Shortest stable decimal with at most 6 significant digits. */
export function fmt(x: number): string {
  if (x === 0) return "0";
  if (Number.isInteger(x) && Math.abs(x) < 1e15) return String(x);
  return String(parseFloat(x.toPrecision(6)));
}

export function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function el(
  tag: string,
  attrs: Record<string, string | number>,
  body = "",
): string {
  const parts = Object.entries(attrs)
    .map(([k, v]) => `${k}="${typeof v === "number" ? fmt(v) : esc(v)}"`)
    .join(" ");
  const open = parts ? `<${tag} ${parts}` : `<${tag}`;
  return body === "" ? `${open}/>` : `${open}>${body}</${tag}>`;
}

export function text(
  x: number, y: number, s: string,
  attrs: Record<string, string | number> = {},
): string {
  return el("text", {
    x, y, "font-family": FONT, "font-size": 12, fill: "#222", ...attrs,
  }, esc(s));
}

export function svgDoc(title: string, caption: string, body: string): string {
  const head = text(MARGIN.left, 24, title, { "font-size": 14, "font-weight": "bold" });
  const foot = text(MARGIN.left, HEIGHT - 10, caption, { "font-size": 11, fill: "#555" });
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
    el("rect", { x: 0, y: 0, width: WIDTH, height: HEIGHT, fill: "#ffffff" }),
    head,
    body,
    foot,
    "</svg>",
    "",
  ].join("\n");
}

export interface Frame {
  x0: number;
  x1: number;
  y0: number;
  y1: number;
}

export function plotFrame(): Frame {
  return {
    x0: MARGIN.left,
    x1: WIDTH - MARGIN.right,
    y0: HEIGHT - MARGIN.bottom,
    y1: MARGIN.top,
  };
}

type Scale = { (v: number): number; ticks(n?: number): number[] };

export function xAxis(frame: Frame, scale: Scale, label: string,
                      tickFmt: (v: number) => string = fmt): string {
  const parts = [el("line", {
    x1: frame.x0, y1: frame.y0, x2: frame.x1, y2: frame.y0,
    stroke: "#222", "stroke-width": 1,
  })];
  for (const t of scale.ticks(6)) {
    const x = scale(t);
    if (x < frame.x0 - 0.5 || x > frame.x1 + 0.5) continue;
    parts.push(el("line", {
      x1: x, y1: frame.y0, x2: x, y2: frame.y0 + 5, stroke: "#222",
      "stroke-width": 1,
    }));
    parts.push(text(x, frame.y0 + 18, tickFmt(t), { "text-anchor": "middle" }));
  }
  parts.push(text((frame.x0 + frame.x1) / 2, frame.y0 + 34, label,
                  { "text-anchor": "middle", "font-size": 12 }));
  return parts.join("\n");
}

export function yAxis(frame: Frame, scale: Scale, label: string,
                      tickFmt: (v: number) => string = fmt): string {
  const parts = [el("line", {
    x1: frame.x0, y1: frame.y0, x2: frame.x0, y2: frame.y1,
    stroke: "#222", "stroke-width": 1,
  })];
  for (const t of scale.ticks(6)) {
    const y = scale(t);
    if (y > frame.y0 + 0.5 || y < frame.y1 - 0.5) continue;
    parts.push(el("line", {
      x1: frame.x0 - 5, y1: y, x2: frame.x0, y2: y, stroke: "#222",
      "stroke-width": 1,
    }));
    parts.push(el("line", {
      x1: frame.x0, y1: y, x2: frame.x1, y2: y, stroke: "#ddd",
      "stroke-width": 0.5,
    }));
    parts.push(text(frame.x0 - 8, y + 4, tickFmt(t), { "text-anchor": "end" }));
  }
  parts.push(el("g", {
    transform: `translate(16 ${(frame.y0 + frame.y1) / 2}) rotate(-90)`,
  }, text(0, 0, label, { "text-anchor": "middle", "font-size": 12 })));
  return parts.join("\n");
}

export function polyline(
  pts: Array<[number, number]>,
  attrs: Record<string, string | number>,
): string {
  const d = pts.map(([x, y], i) => `${i === 0 ? "M" : "L"}${fmt(x)} ${fmt(y)}`)
    .join("");
  return el("path", { d, fill: "none", ...attrs });
}

export function legend(
  frame: Frame, entries: Array<[string, string]>,
): string {
  const parts: string[] = [];
  entries.forEach(([label, color], i) => {
    const y = frame.y1 + 6 + 16 * i;
    const x = frame.x1 - 150;
    parts.push(el("line", {
      x1: x, y1: y, x2: x + 18, y2: y, stroke: color, "stroke-width": 2,
    }));
    parts.push(text(x + 24, y + 4, label, { "font-size": 11 }));
  });
  return parts.join("\n");
}
