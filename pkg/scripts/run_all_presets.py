#!/usr/bin/env python3
"""Run every preset at its default horizons into out/<preset>/."""

import argparse
import sys

from multbox.config import preset_config, preset_names
from multbox.harness import run_experiment


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out", help="parent output directory")
    ap.add_argument("--seed", type=int, default=None, help="master seed")
    args = ap.parse_args()
    for name in preset_names():
        cfg = preset_config(name, seed=args.seed,
                            outdir=f"{args.out}/{name}")
        manifest = run_experiment(cfg)
        total = sum(manifest.timings.values())
        tables = ", ".join(sorted(manifest.outputs))
        print(f"{name:22s} {total:6.2f}s  {tables}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
