"""Seeded Monte Carlo experiments on the sampling estimator.

For every sample count ``m`` and trial ``j`` one stream of uniforms is drawn
from a seed derived from ``(master_seed, m, j)``. Every scheme maps that same
stream through its own inverse CDF (common random numbers), so scheme
comparisons are paired trial by trial. Results depend only on the config,
never on execution order.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import matio
from .bounds import BernsteinCertificate, certificate, evaluate_tail
from .errors import ConfigError
from .matcore import PairedMatrices, generate_matrix, spectrum_for_target_sr
from .sampler import (
    SamplingScheme,
    build_distribution,
    estimate_product,
    indices_from_uniforms,
    relative_spectral_errors,
)

SCHEMA_VERSION = 1
QUANTILE_LEVELS = (0.0, 0.25, 0.5, 0.75, 0.95, 1.0)
BOUND_FORMS = ("theorem", "proof")


@dataclass(frozen=True)
class MatrixSpec:
    """Where the pair ``(A, B)`` comes from: two CSV files, or a synthetic recipe.

    Synthetic matrices have the flat-tail spectrum of ``spectrum_for_target_sr``.
    ``column_decay > 0`` then scales column ``i`` of both matrices by
    ``(i + 1) ** -column_decay``, which makes column norms strongly nonuniform
    (and moves the stable ranks away from their targets).
    """

    d_a: int = 16
    d_b: int = 16
    n: int = 512
    sr_a: float = 1.0
    sr_b: float = 1.0
    seed: int = 0
    column_decay: float = 0.0
    a_path: str | None = None
    b_path: str | None = None

    @property
    def from_files(self) -> bool:
        return self.a_path is not None or self.b_path is not None


def derive_seed(*keys: int) -> int:
    """Stable 64-bit seed from a tuple of nonnegative integers."""
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1, np.uint64)[0])


def make_pair(spec: MatrixSpec) -> PairedMatrices:
    if spec.from_files:
        if spec.a_path is None or spec.b_path is None:
            raise ConfigError("both a_path and b_path are required")
        return PairedMatrices(matio.read_matrix(spec.a_path), matio.read_matrix(spec.b_path))
    A = generate_matrix(
        spec.d_a, spec.n, spectrum_for_target_sr(spec.sr_a, min(spec.d_a, spec.n)),
        derive_seed(spec.seed, 0),
    )
    B = generate_matrix(
        spec.d_b, spec.n, spectrum_for_target_sr(spec.sr_b, min(spec.d_b, spec.n)),
        derive_seed(spec.seed, 1),
    )
    if spec.column_decay:
        scale = np.arange(1, spec.n + 1, dtype=np.float64) ** -spec.column_decay
        A, B = A * scale, B * scale
    return PairedMatrices(A, B)


@dataclass(frozen=True)
class ExperimentConfig:
    matrices: MatrixSpec = field(default_factory=MatrixSpec)
    schemes: tuple[str, ...] = ("proposed",)
    m_grid: tuple[int, ...] = (1024,)
    trials: int = 100
    master_seed: int = 0
    t_grid: tuple[float, ...] = (3.0, 5.0, 8.0)
    bound_form: str = "theorem"

    def __post_init__(self):
        try:
            schemes = tuple(SamplingScheme.parse(s).value for s in self.schemes)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not schemes or len(set(schemes)) != len(schemes):
            raise ConfigError("schemes must be nonempty and distinct")
        m_grid = tuple(self.m_grid)
        if not m_grid or any(not _is_int(m) or m < 1 for m in m_grid):
            raise ConfigError("m_grid must be a nonempty list of positive integers")
        if any(b <= a for a, b in zip(m_grid, m_grid[1:])):
            raise ConfigError("m_grid must be strictly ascending")
        if not _is_int(self.trials) or self.trials < 1:
            raise ConfigError("trials must be a positive integer")
        if not _is_int(self.master_seed) or self.master_seed < 0:
            raise ConfigError("master_seed must be a nonnegative integer")
        t_grid = tuple(float(t) for t in self.t_grid)
        if any(not t > 0 or not math.isfinite(t) for t in t_grid):
            raise ConfigError("t_grid values must be positive")
        if self.bound_form not in BOUND_FORMS:
            raise ConfigError(f"bound_form must be one of {BOUND_FORMS}")
        object.__setattr__(self, "schemes", schemes)
        object.__setattr__(self, "m_grid", tuple(int(m) for m in m_grid))
        object.__setattr__(self, "t_grid", t_grid)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["matrices"] = {k: v for k, v in d["matrices"].items() if v is not None}
        d["schemes"] = list(self.schemes)
        d["m_grid"] = list(self.m_grid)
        d["t_grid"] = list(self.t_grid)
        return d

    @classmethod
    def from_dict(cls, d: dict, base_dir=None) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kw = dict(d)
        mats = kw.get("matrices", {})
        if not isinstance(mats, dict):
            raise ConfigError("matrices must be an object")
        unknown = set(mats) - set(MatrixSpec.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown matrices keys: {sorted(unknown)}")
        mats = dict(mats)
        for key in ("a_path", "b_path"):
            if key in mats and base_dir is not None:
                mats[key] = str(Path(base_dir) / mats[key])
        kw["matrices"] = MatrixSpec(**mats)
        for key in ("schemes", "m_grid", "t_grid"):
            if key in kw:
                if not isinstance(kw[key], (list, tuple)):
                    raise ConfigError(f"{key} must be a list")
                kw[key] = tuple(kw[key])
        try:
            return cls(**kw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


def _is_int(x) -> bool:
    return isinstance(x, (int, np.integer)) and not isinstance(x, bool)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return ExperimentConfig.from_dict(data, base_dir=path.parent)


@dataclass(frozen=True)
class ExceedRecord:
    t: float
    exceed_fraction: float
    bound_deviation: float
    bound_failure: float

    @property
    def vacuous(self) -> bool:
        return self.bound_failure >= 1.0


@dataclass(frozen=True)
class CellReport:
    scheme: str
    m: int
    quantiles: tuple[float, ...]
    exceedance: tuple[ExceedRecord, ...]
    errors: tuple[float, ...]

    @property
    def median(self) -> float:
        return self.quantiles[QUANTILE_LEVELS.index(0.5)]

    def quantile(self, level: float) -> float:
        return self.quantiles[QUANTILE_LEVELS.index(level)]


@dataclass(frozen=True)
class TrialReport:
    config: ExperimentConfig
    certificate: BernsteinCertificate
    cells: tuple[CellReport, ...]
    mode: str = "experiment"
    schema_version: int = SCHEMA_VERSION

    def cell(self, scheme, m: int) -> CellReport:
        scheme = SamplingScheme.parse(scheme).value
        for c in self.cells:
            if c.scheme == scheme and c.m == m:
                return c
        raise KeyError((scheme, m))

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "mode": self.mode,
            "config": self.config.to_dict(),
            "certificate": self.certificate.to_dict(),
            "quantile_levels": list(QUANTILE_LEVELS),
            "cells": [
                {
                    "scheme": c.scheme,
                    "m": c.m,
                    "quantiles": list(c.quantiles),
                    "exceedance": [asdict(e) for e in c.exceedance],
                    "errors": list(c.errors),
                }
                for c in self.cells
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "TrialReport":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {d.get('schema_version')!r}")
        cells = tuple(
            CellReport(
                scheme=c["scheme"],
                m=int(c["m"]),
                quantiles=tuple(float(v) for v in c["quantiles"]),
                exceedance=tuple(ExceedRecord(**e) for e in c["exceedance"]),
                errors=tuple(float(v) for v in c["errors"]),
            )
            for c in d["cells"]
        )
        return cls(
            config=ExperimentConfig.from_dict(d["config"]),
            certificate=BernsteinCertificate.from_dict(d["certificate"]),
            cells=cells,
            mode=d["mode"],
        )

    @classmethod
    def from_json(cls, text: str) -> "TrialReport":
        return cls.from_dict(json.loads(text))

    def quantiles_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["scheme", "m", "quantile", "value"])
        for c in self.cells:
            for level, v in zip(QUANTILE_LEVELS, c.quantiles):
                w.writerow([c.scheme, c.m, repr(level), repr(v)])
        return buf.getvalue()

    def exceedance_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["scheme", "m", "t", "exceed_fraction", "bound_deviation", "bound_failure"])
        for c in self.cells:
            for e in c.exceedance:
                w.writerow([c.scheme, c.m, repr(e.t), repr(e.exceed_fraction),
                            repr(e.bound_deviation), repr(e.bound_failure)])
        return buf.getvalue()

    def write(self, out_dir) -> dict[str, Path]:
        """Write ``report.json``, ``quantiles.csv`` and ``exceedance.csv`` into ``out_dir``."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {
            "report": out / "report.json",
            "quantiles": out / "quantiles.csv",
            "exceedance": out / "exceedance.csv",
        }
        paths["report"].write_text(self.to_json())
        paths["quantiles"].write_text(self.quantiles_csv())
        paths["exceedance"].write_text(self.exceedance_csv())
        return paths


def nearest_rank_quantiles(values, levels=QUANTILE_LEVELS) -> tuple[float, ...]:
    """Nearest-rank quantiles: the ``ceil(q N)``-th smallest value (the minimum for q=0)."""
    v = np.sort(np.asarray(values, dtype=np.float64))
    N = v.size
    return tuple(float(v[max(math.ceil(q * N), 1) - 1]) for q in levels)


def trial_errors(P: PairedMatrices, dists: dict, m: int, trials: int, master_seed: int) -> dict[str, np.ndarray]:
    """Relative spectral errors of ``trials`` estimates per scheme, on shared uniforms."""
    stacks = {name: np.empty((trials,) + P.product.shape) for name in dists}
    for j in range(trials):
        u = np.random.default_rng(derive_seed(master_seed, m, j)).random(m)
        for name, dist in dists.items():
            stacks[name][j] = estimate_product(P, dist, indices_from_uniforms(dist, u)).estimate
    return {name: relative_spectral_errors(stack, P) for name, stack in stacks.items()}


def run_experiment(config: ExperimentConfig, pair: PairedMatrices | None = None, mode: str = "experiment") -> TrialReport:
    """Run every (scheme, m) cell of ``config`` and summarize the errors.

    ``pair`` overrides ``config.matrices`` when given.
    """
    P = make_pair(config.matrices) if pair is None else pair
    cert = certificate(P)
    dists = {s: build_distribution(P, s) for s in config.schemes}
    cells = []
    for m in config.m_grid:
        errors = trial_errors(P, dists, m, config.trials, config.master_seed)
        tails = [evaluate_tail(cert, m, t, config.bound_form) for t in config.t_grid]
        for s in config.schemes:
            e = errors[s]
            exceed = tuple(
                ExceedRecord(tail.t, float(np.mean(e > tail.deviation)), tail.deviation, tail.failure_prob)
                for tail in tails
            )
            cells.append(CellReport(s, m, nearest_rank_quantiles(e), exceed, tuple(float(x) for x in e)))
    cells.sort(key=lambda c: (config.schemes.index(c.scheme), c.m))
    return TrialReport(config, cert, tuple(cells), mode=mode)


def compare_schemes(config: ExperimentConfig, pair: PairedMatrices | None = None) -> TrialReport:
    """Like ``run_experiment``, but insists on at least two schemes to compare."""
    if len(config.schemes) < 2:
        raise ConfigError("compare_schemes needs at least two schemes")
    return run_experiment(config, pair, mode="compare")
