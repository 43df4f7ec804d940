"""Command line front end: run presets, list and describe them, verify.

Exit codes: 0 on success, 2 when a mathematical invariant or a config
constraint is violated, 3 when a declared budget would be exceeded.
"""

from __future__ import annotations

import argparse
import subprocess
import sys

from .config import (apply_overrides, load_config, preset_config,
                     preset_names)
from .errors import BudgetExceeded, InvariantViolation
from .harness import describe_preset, preset_summaries, run_experiment

__all__ = ["main", "build_parser"]

_OVERRIDE_FLAGS = (
    ("--k", int, "ambient dimension"),
    ("--measure", str, "measure preset name"),
    ("--psi-family", str, "threshold family (power | log-power | log-floor)"),
    ("--psi-c", float, "power-family coefficient"),
    ("--psi-exp", float, "threshold exponent (tau for power, a for log-power)"),
    ("--tau", float, "scale-window pinch, in (0, 1/k)"),
    ("--plateau", float, "window plateau fraction in [0, 1)"),
    ("--m-min", int, "first dyadic block"),
    ("--m-max", int, "last dyadic block"),
    ("--n-lo", int, "first modulus of per-modulus tables"),
    ("--n-hi", int, "last modulus of per-modulus tables"),
    ("--n-max", int, "threshold-scan horizon"),
    ("--q-max", int, "exact-enumeration horizon"),
    ("--xi-max", int, "frequency ceiling"),
    ("--samples", int, "Monte Carlo sample count"),
    ("--points", int, "random point count for hit scans"),
    ("--shifts", int, "random shifts per pair"),
    ("--seed", int, "master seed"),
)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="multbox",
        description="multiplicative approximation experiments on box systems")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a preset and write CSV + manifest")
    run.add_argument("preset", help="preset name (see list-presets)")
    run.add_argument("--config", help="TOML config file; flags override it")
    run.add_argument("--out", dest="outdir", help="output directory")
    run.add_argument("--checkpoints", type=int, nargs="+",
                     help="partial-sum checkpoints")
    for flag, typ, desc in _OVERRIDE_FLAGS:
        run.add_argument(flag, type=typ, help=desc)

    sub.add_parser("list-presets", help="list preset names and summaries")

    desc = sub.add_parser("describe", help="show one preset's documentation")
    desc.add_argument("preset")

    ver = sub.add_parser("verify", help="run the acceptance test suite")
    ver.add_argument("--tests", default="tests/test_acceptance.py",
                     help="pytest target (default: tests/test_acceptance.py)")
    return p


def _config_from_args(args) -> object:
    overrides = {}
    for flag, _, _ in _OVERRIDE_FLAGS:
        name = flag.lstrip("-").replace("-", "_")
        overrides[name] = getattr(args, name)
    overrides["outdir"] = args.outdir
    if args.checkpoints is not None:
        overrides["checkpoints"] = tuple(args.checkpoints)
    if args.config:
        cfg = load_config(args.config)
        if cfg.preset != args.preset:
            raise ValueError(f"config file is for preset '{cfg.preset}', "
                             f"not '{args.preset}'")
        return apply_overrides(cfg, **overrides)
    return preset_config(args.preset, **overrides)


def _cmd_run(args) -> int:
    cfg = _config_from_args(args)
    manifest = run_experiment(cfg)
    total = sum(manifest.timings.values())
    print(f"{cfg.preset}: {len(manifest.outputs)} tables in {cfg.outdir}/ "
          f"(config {manifest.config_hash}, {total:.2f}s)")
    for table, meta in sorted(manifest.outputs.items()):
        print(f"  {meta['path']}: {meta['rows']} rows")
    return 0


def _cmd_list() -> int:
    for name, summary in preset_summaries():
        print(f"{name:22s} {summary}")
    return 0


def _cmd_describe(args) -> int:
    print(describe_preset(args.preset))
    return 0


def _cmd_verify(args) -> int:
    proc = subprocess.run([sys.executable, "-m", "pytest", args.tests, "-q"])
    return 0 if proc.returncode == 0 else 2


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "list-presets":
            return _cmd_list()
        if args.command == "describe":
            return _cmd_describe(args)
        return _cmd_verify(args)
    except BudgetExceeded as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return 3
    except (InvariantViolation, ValueError) as e:
        print(f"invariant violation: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
