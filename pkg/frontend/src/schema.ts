/**
 * The CSV contract of the multbox run directories.
 *
 * Column lists mirror the producer exactly, in order.  Anything off the
 * contract (missing or extra columns, reordered header, empty table,
 * unparsable cell, mixed config digests) is rejected with the table and
 * column named, never patched over.
 */

import Papa from "papaparse";

export const TABLE_COLUMNS = {
  gallagher: ["config_hash", "point_id", "horizon", "hits"],
  ratios: ["config_hash", "n", "ratio", "se", "envelope", "measure"],
  dyadic: ["config_hash", "N", "etp_ratio", "vtp_excess", "measure"],
  decay: ["config_hash", "radius", "direction", "magnitude", "sigma", "stderr"],
  qi_pairs: [
    "config_hash", "n", "nprime", "gcd", "volume", "main", "error", "constant",
  ],
  qi_sums: ["config_hash", "N", "lhs", "expectation", "ratio"],
  qi_plateaus: [
    "config_hash", "plateau", "fitted_c", "observed_max", "setwise_ok",
    "tail_max",
  ],
} as const;

export type TableName = keyof typeof TABLE_COLUMNS;

export const TABLE_NAMES = Object.keys(TABLE_COLUMNS) as TableName[];

export type Row = Record<string, string>;

export interface Table {
  name: TableName;
  configHash: string;
  rows: Row[];
}

export class SchemaError extends Error {}

export function parseTable(name: TableName, csvText: string): Table {
  const expected = TABLE_COLUMNS[name] as readonly string[];
  const parsed = Papa.parse<Row>(csvText, {
    header: true,
    skipEmptyLines: true,
  });
  for (const err of parsed.errors) {
    throw new SchemaError(`${name}.csv: malformed CSV: ${err.message}`);
  }
  const got = parsed.meta.fields ?? [];
  for (const col of expected) {
    if (!got.includes(col)) {
      throw new SchemaError(`${name}.csv: missing column "${col}"`);
    }
  }
  for (const col of got) {
    if (!expected.includes(col)) {
      throw new SchemaError(`${name}.csv: unexpected column "${col}"`);
    }
  }
  if (got.some((col, i) => col !== expected[i])) {
    throw new SchemaError(
      `${name}.csv: column order must be ${expected.join(", ")}`,
    );
  }
  if (parsed.data.length === 0) {
    throw new SchemaError(`${name}.csv: no data rows`);
  }
  const hashes = new Set(parsed.data.map((r) => r["config_hash"] ?? ""));
  if (hashes.size !== 1) {
    throw new SchemaError(
      `${name}.csv: rows carry ${hashes.size} distinct config_hash values`,
    );
  }
  const configHash = [...hashes][0]!;
  if (!/^[0-9a-f]{12}$/.test(configHash)) {
    throw new SchemaError(
      `${name}.csv: config_hash "${configHash}" is not a 12-hex digest`,
    );
  }
  return { name, configHash, rows: parsed.data };
}

/** Numeric cell; rejects anything Number() cannot fully digest. */
export function num(t: Table, row: Row, col: string, idx: number): number {
  const raw = row[col];
  if (raw === undefined || raw === "") {
    throw new SchemaError(
      `${t.name}.csv row ${idx}: column "${col}" is empty`,
    );
  }
  const v = Number(raw);
  if (!Number.isFinite(v)) {
    throw new SchemaError(
      `${t.name}.csv row ${idx}: column "${col}" is not a number: "${raw}"`,
    );
  }
  return v;
}

/** Numeric cell that the producer may legitimately leave empty. */
export function optNum(
  t: Table, row: Row, col: string, idx: number,
): number | null {
  const raw = row[col];
  if (raw === undefined || raw === "") return null;
  return num(t, row, col, idx);
}

/** Exact-rational cell "p/q" (or a plain integer), reduced to a float. */
export function frac(t: Table, row: Row, col: string, idx: number): number {
  const raw = row[col] ?? "";
  const m = /^(-?\d+)(?:\/(\d+))?$/.exec(raw);
  if (!m) {
    throw new SchemaError(
      `${t.name}.csv row ${idx}: column "${col}" is not a fraction: "${raw}"`,
    );
  }
  const p = Number(m[1]);
  const q = m[2] === undefined ? 1 : Number(m[2]);
  if (q === 0) {
    throw new SchemaError(
      `${t.name}.csv row ${idx}: column "${col}" has a zero denominator`,
    );
  }
  return p / q;
}

export function bool(t: Table, row: Row, col: string, idx: number): boolean {
  const raw = row[col];
  if (raw === "true") return true;
  if (raw === "false") return false;
  throw new SchemaError(
    `${t.name}.csv row ${idx}: column "${col}" is not true/false: "${raw}"`,
  );
}

export function str(t: Table, row: Row, col: string, idx: number): string {
  const raw = row[col];
  if (raw === undefined || raw === "") {
    throw new SchemaError(
      `${t.name}.csv row ${idx}: column "${col}" is empty`,
    );
  }
  return raw;
}
