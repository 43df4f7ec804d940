import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { SchemaError, frac, num, parseTable } from "../src/schema";

const fixture = (rel: string) =>
  readFileSync(fileURLToPath(new URL(`./fixtures/${rel}`, import.meta.url)),
               "utf8");

const RATIOS_HEAD = "config_hash,n,ratio,se,envelope,measure";
const ROW = "abcdef012345,8,1.02,0.05,0.5,sphere-cap-k3";

describe("parseTable", () => {
  it("accepts a produced fixture", () => {
    const t = parseTable("ratios", fixture("curved-etp/ratios.csv"));
    expect(t.rows.length).toBeGreaterThan(10);
    expect(t.configHash).toMatch(/^[0-9a-f]{12}$/);
  });

  it("names a missing column", () => {
    const text = "config_hash,n,ratio,se,measure\n"
      + "abcdef012345,8,1.0,0.1,m\n";
    expect(() => parseTable("ratios", text))
      .toThrow(/missing column "envelope"/);
  });

  it("names an unexpected column", () => {
    const text = `${RATIOS_HEAD},extra\n${ROW},x\n`;
    expect(() => parseTable("ratios", text))
      .toThrow(/unexpected column "extra"/);
  });

  it("rejects reordered headers", () => {
    const text = "n,config_hash,ratio,se,envelope,measure\n"
      + "8,abcdef012345,1.0,0.1,,m\n";
    expect(() => parseTable("ratios", text))
      .toThrow(/column order must be/);
  });

  it("rejects an empty table", () => {
    expect(() => parseTable("ratios", `${RATIOS_HEAD}\n`))
      .toThrow(/no data rows/);
  });

  it("rejects mixed config digests", () => {
    const text = `${RATIOS_HEAD}\n${ROW}\n`
      + "012345abcdef,9,1.0,0.1,0.4,sphere-cap-k3\n";
    expect(() => parseTable("ratios", text))
      .toThrow(/2 distinct config_hash values/);
  });

  it("rejects a malformed digest", () => {
    const text = `${RATIOS_HEAD}\nnot-a-digest,8,1.0,0.1,,m\n`;
    expect(() => parseTable("ratios", text)).toThrow(/12-hex digest/);
  });
});

describe("cell accessors", () => {
  const table = parseTable("ratios", `${RATIOS_HEAD}\n${ROW}\n`);
  const row = table.rows[0]!;

  it("reads numbers", () => {
    expect(num(table, row, "ratio", 0)).toBeCloseTo(1.02);
  });

  it("names the column on a bad number", () => {
    const bad = parseTable(
      "ratios", `${RATIOS_HEAD}\nabcdef012345,8,oops,0.1,,m\n`);
    expect(() => num(bad, bad.rows[0]!, "ratio", 0))
      .toThrow(/column "ratio" is not a number: "oops"/);
    expect(() => num(bad, bad.rows[0]!, "ratio", 0)).toThrow(SchemaError);
  });

  it("reads fractions, including huge ones", () => {
    const t = parseTable(
      "qi_sums",
      "config_hash,N,lhs,expectation,ratio\n"
      + "abcdef012345,8,3/4,11430014994528800707182060190521/"
      + "1298074214633706907132624082305024,0.1\n");
    const r = t.rows[0]!;
    expect(frac(t, r, "lhs", 0)).toBe(0.75);
    expect(frac(t, r, "expectation", 0)).toBeCloseTo(8.805e-3, 5);
  });

  it("rejects a non-fraction", () => {
    const t = parseTable(
      "qi_sums",
      "config_hash,N,lhs,expectation,ratio\nabcdef012345,8,0.75,1/2,0.1\n");
    expect(() => frac(t, t.rows[0]!, "lhs", 0))
      .toThrow(/column "lhs" is not a fraction/);
  });
});
