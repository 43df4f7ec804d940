/** Run-directory rendering: every recognized table becomes one SVG. */

import { readFileSync, readdirSync, mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";
import { KIND_BY_TABLE, renderFigure, FigureKind } from "./figures.js";
import { TABLE_NAMES, TableName, parseTable } from "./schema.js";

export interface Rendered {
  table: TableName;
  kind: FigureKind;
  svg: string;
}

export function renderCsv(name: TableName, csvText: string): Rendered {
  const table = parseTable(name, csvText);
  return { table: name, kind: KIND_BY_TABLE[name], svg: renderFigure(table) };
}

export function renderRunDir(dir: string): Rendered[] {
  const present = new Set(readdirSync(dir));
  const out: Rendered[] = [];
  for (const name of TABLE_NAMES) {
    const file = `${name}.csv`;
    if (!present.has(file)) continue;
    out.push(renderCsv(name, readFileSync(join(dir, file), "utf8")));
  }
  if (out.length === 0) {
    throw new Error(
      `${dir}: no recognized tables (expected one of `
      + `${TABLE_NAMES.map((n) => `${n}.csv`).join(", ")})`,
    );
  }
  return out;
}

export function writeFigures(dir: string, outDir: string): string[] {
  const rendered = renderRunDir(dir);
  mkdirSync(outDir, { recursive: true });
  const written: string[] = [];
  for (const r of rendered) {
    const path = join(outDir, `${r.table}.svg`);
    writeFileSync(path, r.svg, "utf8");
    written.push(path);
  }
  return written;
}
