#!/usr/bin/env node
/** Usage: multbox-figures <run-dir> [--out <dir>] */

import { join } from "node:path";
import { renderRunDir, writeFigures } from "./render.js";

function main(argv: string[]): number {
  const args = [...argv];
  let out: string | null = null;
  const idx = args.indexOf("--out");
  if (idx >= 0) {
    const v = args[idx + 1];
    if (v === undefined) {
      console.error("--out needs a directory");
      return 1;
    }
    out = v;
    args.splice(idx, 2);
  }
  const dir = args[0];
  if (dir === undefined || args.length !== 1) {
    console.error("usage: multbox-figures <run-dir> [--out <dir>]");
    return 1;
  }
  try {
    const outDir = out ?? join(dir, "figures");
    const kinds = new Map(renderRunDir(dir).map((r) => [r.table, r.kind]));
    for (const path of writeFigures(dir, outDir)) {
      const table = path.split("/").pop()!.replace(/\.svg$/, "");
      console.log(`wrote ${path} (${kinds.get(table as never) ?? "?"})`);
    }
    return 0;
  } catch (e) {
    console.error(e instanceof Error ? e.message : String(e));
    return 1;
  }
}

process.exit(main(process.argv.slice(2)));
