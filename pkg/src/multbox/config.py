"""Experiment configuration, preset defaults, and reproducible seeding.

One ExperimentConfig drives a whole run: which preset pipeline to
execute, the ambient dimension, the measure and threshold family, the
block and modulus horizons, the sample counts, and the master seed.  A
config is hashable to a short hex digest that every output row carries,
so a CSV line can always be traced back to the exact configuration that
produced it.  The digest covers everything except the output directory:
where the files land must not change what is in them.

Seeding is counter based: the master seed and a per-stage tag form the
key of a Philox stream, so stages draw from independent, individually
reproducible streams and inserting a new stage never shifts an existing
one.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Optional, Sequence

import numpy as np
import tomli

from .errors import BudgetExceeded

__all__ = [
    "BUDGETS",
    "CONFIG_SCHEMA_VERSION",
    "ExperimentConfig",
    "PRESET_DEFAULTS",
    "preset_names",
    "preset_config",
    "load_config",
    "apply_overrides",
    "config_hash",
    "stage_seed",
    "stage_rng",
]

CONFIG_SCHEMA_VERSION = 1

#: hard desk-scale caps; a config asking beyond these is refused up front
BUDGETS = {
    "k": 9,
    "m_max": 18,
    "n_hi": 1 << 17,
    "n_max": 2_000_000,
    "q_max": 4096,
    "xi_max": 1024,
    "samples": 500_000,
    "points": 1000,
    "shifts": 64,
}

_MEASURES = ("none", "lebesgue", "sphere-cap", "paraboloid",
             "hyperplane-sqrt", "hyperplane-tilt")
_PSI_FAMILIES = ("power", "log-power", "log-floor")


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete description of one experiment run.

    Horizon fields, in the order they bind: m_min..m_max select the
    dyadic blocks of the admissible system, n_lo..n_hi the modulus
    window of per-modulus tables, checkpoints the partial-sum marks,
    n_max the threshold-scan horizon, q_max the exact-enumeration
    horizon, and xi_max the frequency ceiling.
    """

    preset: str
    k: int = 3
    measure: str = "none"
    psi_family: str = "power"
    psi_c: float = 0.3
    psi_exp: float = 1.0
    tau: float = 0.2
    plateau: Optional[float] = None
    m_min: int = 1
    m_max: int = 8
    n_lo: int = 2
    n_hi: int = 255
    checkpoints: tuple = ()
    n_max: int = 100_000
    q_max: int = 24
    xi_max: int = 32
    samples: int = 50_000
    points: int = 100
    shifts: int = 3
    seed: int = 20260823
    outdir: str = "out"

    def __post_init__(self):
        if self.preset not in PRESET_DEFAULTS:
            raise ValueError(f"unknown preset '{self.preset}'; "
                             f"choose from {', '.join(preset_names())}")
        if self.measure not in _MEASURES:
            raise ValueError(f"unknown measure preset '{self.measure}'")
        if self.psi_family not in _PSI_FAMILIES:
            raise ValueError(f"unknown threshold family '{self.psi_family}'")
        if not 2 <= self.k:
            raise ValueError("ambient dimension must be at least 2")
        if self.m_min < 1 or self.m_max < self.m_min:
            raise ValueError("need 1 <= m_min <= m_max")
        if self.n_lo < 1 or self.n_hi < self.n_lo:
            raise ValueError("need 1 <= n_lo <= n_hi")
        if self.samples < 2 or self.points < 1 or self.shifts < 0:
            raise ValueError("sample, point, and shift counts out of range")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
        cps = tuple(int(v) for v in self.checkpoints)
        if any(v < 2 for v in cps):
            raise ValueError("checkpoints must be moduli >= 2")
        object.__setattr__(self, "checkpoints", cps)
        for name, cap in BUDGETS.items():
            if getattr(self, name) > cap:
                raise BudgetExceeded(
                    f"{name} = {getattr(self, name)} exceeds the budget {cap}")

    def mathematical_dict(self) -> dict:
        """Every field that affects output values; outdir excluded."""
        d = asdict(self)
        d.pop("outdir")
        d["checkpoints"] = list(self.checkpoints)
        return d


def config_hash(cfg: ExperimentConfig) -> str:
    """12-hex digest of the canonical JSON of the mathematical fields."""
    blob = json.dumps(cfg.mathematical_dict(), sort_keys=True,
                      separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


# ── counter-based per-stage seeding ──────────────────────────────────────────

def _stage_tag(stage: str) -> int:
    """Stable 64-bit FNV-1a tag of the stage name."""
    h = 0xCBF29CE484222325
    for b in stage.encode():
        h = ((h ^ b) * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def stage_rng(seed: int, stage: str) -> np.random.Generator:
    """Philox stream keyed by (master seed, stage tag)."""
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, _stage_tag(stage)],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def stage_seed(seed: int, stage: str) -> int:
    """Integer seed for samplers that derive their own streams."""
    return int(stage_rng(seed, stage).integers(0, 2 ** 63))


# ── presets ──────────────────────────────────────────────────────────────────

PRESET_DEFAULTS = {
    "lebesgue-gallagher": dict(
        k=3, measure="none", psi_family="log-power", psi_exp=2.0,
        n_max=100_000, points=100,
    ),
    "curved-etp": dict(
        k=3, measure="sphere-cap", psi_family="power", psi_c=0.3, psi_exp=1.0,
        tau=0.2, m_min=4, m_max=8, n_lo=8, n_hi=255,
        checkpoints=(16, 32, 64, 128), samples=60_000,
    ),
    "curved-vtp": dict(
        k=3, measure="sphere-cap", psi_family="power", psi_c=0.3, psi_exp=1.0,
        tau=0.2, m_min=4, m_max=9, n_lo=8, n_hi=511,
        checkpoints=(16, 32, 64, 128, 256), samples=40_000,
    ),
    "flat-etp": dict(
        k=3, measure="hyperplane-sqrt", psi_family="power", psi_c=0.3,
        psi_exp=1.0, tau=0.2, m_min=4, m_max=8, n_lo=8, n_hi=255,
        checkpoints=(16, 32, 64, 128), samples=60_000,
    ),
    "flat-vtp": dict(
        k=3, measure="hyperplane-sqrt", psi_family="power", psi_c=0.3,
        psi_exp=1.0, tau=0.2, m_min=4, m_max=9, n_lo=8, n_hi=511,
        checkpoints=(16, 32, 64, 128, 256), samples=40_000,
    ),
    "quasi-independence": dict(
        k=2, measure="none", psi_family="power", psi_c=0.3, psi_exp=1.0,
        tau=0.2, m_min=1, m_max=5, q_max=24, shifts=3,
        checkpoints=(8, 16, 24),
    ),
}


def preset_names() -> list:
    return sorted(PRESET_DEFAULTS)


def preset_config(name: str, **overrides) -> ExperimentConfig:
    """Preset defaults with keyword overrides; None values are ignored."""
    if name not in PRESET_DEFAULTS:
        raise ValueError(f"unknown preset '{name}'; "
                         f"choose from {', '.join(preset_names())}")
    base = dict(PRESET_DEFAULTS[name])
    base.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(preset=name, **base)


def apply_overrides(cfg: ExperimentConfig, **overrides) -> ExperimentConfig:
    clean = {k: v for k, v in overrides.items() if v is not None}
    if not clean:
        return cfg
    if "checkpoints" in clean:
        clean["checkpoints"] = tuple(int(v) for v in clean["checkpoints"])
    return replace(cfg, **clean)


def load_config(path: str) -> ExperimentConfig:
    """Read a TOML config file: schema marker, preset, field overrides."""
    with open(path, "rb") as fh:
        data = tomli.load(fh)
    schema = data.pop("schema", None)
    if schema != CONFIG_SCHEMA_VERSION:
        raise ValueError(f"config schema {schema!r} unsupported; "
                         f"expected {CONFIG_SCHEMA_VERSION}")
    preset = data.pop("preset", None)
    if preset is None:
        raise ValueError("config file must name a preset")
    known = {f.name for f in fields(ExperimentConfig)} - {"preset"}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config fields: {', '.join(sorted(unknown))}")
    return preset_config(preset, **data)
