"""Monte-Carlo comparison of the estimators on synthetic fBm.

Each replicate synthesises one realisation, transforms it with every filter,
optionally contaminates one level, and runs every estimator on every
direction.  Clean and contaminated arms share the realisation.  Replicates
are independent work units; per-replicate streams come from
:mod:`wavehurst.rng` so the report does not depend on the worker count.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from ..dwt import DIRECTION_1D, DIRECTIONS_2D, dwt
from ..errors import InputError
from ..estimators import METHODS, estimate
from ..filters import FILTER_NAMES, make_filter
from ..rng import derive_seed
from ..spectrum import default_level_range, level_energies, parse_levels
from ..synthesis import MATCH_ENERGY, ContaminationSpec, SynthesisSpec, _check_hurst, contaminate, synthesize

log = logging.getLogger(__name__)

PER_REALIZATION = "per-realization"
ENSEMBLE = "ensemble"

# sub-stream keys below each (hurst index, replicate) pair
_SYNTH_STREAM = 0
_NOISE_STREAM = 1


@dataclass(frozen=True)
class ExperimentConfig:
    dim: int = 1
    hurst: tuple = (0.5,)
    size: int = 512
    filters: tuple = FILTER_NAMES
    methods: tuple = METHODS
    directions: tuple | None = None
    level_range: tuple | None = None
    contamination_level: int | None = None
    contamination_directions: tuple | None = None
    # "per-realization", "ensemble" or an explicit variance
    contamination_scale: str | float = PER_REALIZATION
    replicates: int = 100
    base_seed: int = 0
    j0: int = 0
    synthesis_method: str = "circulant"

    def __post_init__(self):
        if self.replicates < 1:
            raise InputError("replicates must be >= 1")
        if self.dim not in (1, 2):
            raise InputError("dim must be 1 or 2")
        for h in self.hurst:
            _check_hurst(h)
        for f in self.filters:
            make_filter(f)
        for m in self.methods:
            if m not in METHODS:
                raise InputError(f"unknown method {m!r}")
        if isinstance(self.contamination_scale, str):
            if self.contamination_scale not in (PER_REALIZATION, ENSEMBLE):
                raise InputError(f"bad contamination_scale {self.contamination_scale!r}")
        elif self.contamination_scale < 0:
            raise InputError("contamination variance must be >= 0")

    @property
    def levels(self) -> tuple[int, int]:
        if self.level_range is None:
            return default_level_range(self.size)
        return parse_levels(self.level_range)

    @property
    def direction_list(self) -> tuple:
        if self.directions is not None:
            return tuple(self.directions)
        return (DIRECTION_1D,) if self.dim == 1 else DIRECTIONS_2D

    @property
    def arms(self) -> tuple:
        return ("clean",) if self.contamination_level is None else ("clean", "contaminated")


@dataclass(frozen=True)
class ReportRow:
    hurst: float
    filter: str
    method: str
    direction: str
    arm: str
    replicates: int
    mean: float
    bias: float
    variance: float
    mse: float


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    rows: list = field(default_factory=list)
    # raw estimates keyed like the rows, in replicate order
    estimates: dict = field(default_factory=dict)

    columns = tuple(f.name for f in fields(ReportRow))

    def cell(self, **key) -> ReportRow:
        hits = [r for r in self.rows if all(getattr(r, k) == v for k, v in key.items())]
        if len(hits) != 1:
            raise KeyError(f"{len(hits)} rows match {key}")
        return hits[0]


def summarize(values, target) -> tuple[float, float, float, float]:
    """Mean, bias, variance (1/n) and MSE of a batch of estimates."""
    v = np.asarray(values, dtype=float)
    mean = float(np.mean(v))
    bias = mean - target
    variance = float(np.mean((v - mean) ** 2))
    mse = float(np.mean((v - target) ** 2))
    return mean, bias, variance, mse


def _realization(config, h_index, rep):
    seed = derive_seed(config.base_seed, h_index, rep, _SYNTH_STREAM)
    spec = SynthesisSpec(config.hurst[h_index], config.dim, config.size, seed=seed)
    return synthesize(spec, method=config.synthesis_method)


def _contamination(config, h_index, rep, f_index, variance):
    seed = derive_seed(config.base_seed, h_index, rep, _NOISE_STREAM, f_index)
    return ContaminationSpec(
        config.contamination_level, config.contamination_directions, variance, seed
    )


def _level_energy_task(args):
    config, h_index, rep = args
    x = _realization(config, h_index, rep)
    out = {}
    for f in config.filters:
        decomp = dwt(x, f, config.j0)
        for d in decomp.directions:
            band = decomp.detail(config.contamination_level, d)
            out[f, d] = float(np.mean(band**2))
    return out


def _replicate_task(args):
    config, h_index, rep, ensemble = args
    try:
        x = _realization(config, h_index, rep)
        out = {}
        for f_index, f in enumerate(config.filters):
            clean = dwt(x, f, config.j0)
            arms = {"clean": clean}
            if config.contamination_level is not None:
                scale = config.contamination_scale
                if ensemble is not None:
                    variance = ensemble[h_index][f]
                elif scale == PER_REALIZATION:
                    variance = MATCH_ENERGY
                else:
                    variance = float(scale)
                dirty = contaminate(clean, _contamination(config, h_index, rep, f_index, variance))
                arms["contaminated"] = dirty
            for arm, decomp in arms.items():
                for d in config.direction_list:
                    spec = level_energies(decomp, d, config.levels)
                    for m in config.methods:
                        out[f, m, d, arm] = estimate(spec, m).hurst
        return out
    except Exception:
        log.error(
            "replicate failed: hurst=%s replicate=%d base_seed=%d",
            config.hurst[h_index], rep, config.base_seed,
        )
        raise


def _map(fn, tasks, workers):
    if workers <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map preserves task order, so reduction below is schedule-independent
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def _ensemble_variances(config, workers):
    """Clean energy at the contaminated level averaged over replicates.

    Returns, per Hurst target, ``{filter: {direction: variance}}``.
    """
    result = []
    for h_index in range(len(config.hurst)):
        tasks = [(config, h_index, r) for r in range(config.replicates)]
        per_rep = _map(_level_energy_task, tasks, workers)
        per_filter = {}
        for f, d in per_rep[0]:
            per_filter.setdefault(f, {})[d] = float(np.mean([p[f, d] for p in per_rep]))
        result.append(per_filter)
    return result


def run_simulation(config: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    """Run the full Monte-Carlo study and aggregate per cell."""
    lo, hi = config.levels
    if config.contamination_level is not None and not lo <= config.contamination_level <= hi:
        log.warning("contamination level %d lies outside the fitted levels %d..%d",
                    config.contamination_level, lo, hi)
    ensemble = None
    if config.contamination_level is not None and config.contamination_scale == ENSEMBLE:
        ensemble = _ensemble_variances(config, workers)
    report = ExperimentReport(config)
    for h_index, target in enumerate(config.hurst):
        tasks = [(config, h_index, r, ensemble) for r in range(config.replicates)]
        per_rep = _map(_replicate_task, tasks, workers)
        for f in config.filters:
            for m in config.methods:
                for d in config.direction_list:
                    for arm in config.arms:
                        values = [p[f, m, d, arm] for p in per_rep]
                        mean, bias, var, mse = summarize(values, target)
                        report.rows.append(
                            ReportRow(target, f, m, d, arm, len(values), mean, bias, var, mse)
                        )
                        report.estimates[target, f, m, d, arm] = np.array(values)
    return report


# ---------------------------------------------------------------------------
# key=value configuration files


def _split(value):
    return tuple(v.strip() for v in value.split(",") if v.strip())


def _none_or(value, conv):
    return None if value.strip().lower() in ("", "none", "auto") else conv(value)


_PARSERS = {
    "dim": int,
    "hurst": lambda v: tuple(float(x) for x in _split(v)),
    "size": int,
    "filters": lambda v: tuple(make_filter(x).name for x in _split(v)),
    "methods": lambda v: tuple(x.lower() for x in _split(v)),
    "directions": lambda v: _none_or(v, _split),
    "levels": lambda v: _none_or(v, parse_levels),
    "contamination_level": lambda v: _none_or(v, int),
    "contamination_directions": lambda v: _none_or(v, _split),
    "contamination_scale": lambda v: v.strip() if v.strip() in (PER_REALIZATION, ENSEMBLE) else float(v),
    "replicates": int,
    "seed": int,
    "j0": int,
    "synthesis_method": str.strip,
}

_RENAME = {"levels": "level_range", "seed": "base_seed"}


def parse_config(text: str) -> ExperimentConfig:
    """Parse ``key = value`` lines (``#`` starts a comment) into a config."""
    kwargs = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        key = key.lower()
        if key not in _PARSERS:
            raise InputError(f"line {lineno}: unknown key {key!r}")
        try:
            kwargs[_RENAME.get(key, key)] = _PARSERS[key](value)
        except (TypeError, ValueError) as exc:
            raise InputError(f"line {lineno}: bad value for {key}: {exc}") from None
    return ExperimentConfig(**kwargs)
