"""Hurst exponent estimators operating on a wavelet spectrum.

All three regress ``y_j`` on the level index ``j``; the slope ``s`` maps to
``H = -(s + m) / 2`` in dimension ``m``.

``ols``
    Unweighted least squares on the raw log-energies.
``av``
    Bias-corrected weighted least squares with weights proportional to ``n_j``.
``tt``
    Weighted mean of every pairwise slope, each corrected for the log bias and
    weighted by ``(i - j)**2 * HA(2**(m i), 2**(m j))`` where ``HA`` is the
    harmonic mean; i.e. inversely to the slope variance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from itertools import combinations

import numpy as np

from .errors import AlreadyCorrected, DegeneratePair, InputError, InsufficientLevels
from .spectrum import (
    BIAS_NONE,
    BIAS_SECOND_ORDER,
    LN2,
    WaveletSpectrum,
    apply_bias_correction,
    av_weight,
    bias_mode,
)

METHODS = ("ols", "av", "tt")


@dataclass(frozen=True)
class HurstEstimate:
    method: str
    direction: str
    dim: int
    slope: float
    hurst: float
    level_range: tuple
    n_levels: int
    flags: tuple = field(default=())

    @property
    def out_of_range(self) -> bool:
        return "out_of_range" in self.flags


def slope_to_hurst(slope: float, dim: int) -> float:
    if dim not in (1, 2):
        raise InputError(f"dimension must be 1 or 2, got {dim}")
    return -(slope + dim) / 2.0


def _finish(method, spec, slope):
    hurst = slope_to_hurst(slope, spec.dim)
    flags = () if 0.0 < hurst < 1.0 else ("out_of_range",)
    return HurstEstimate(
        method, spec.direction, spec.dim, float(slope), float(hurst),
        spec.level_range, len(spec), flags,
    )


def _need_points(spec):
    if len(spec) < 2:
        raise InsufficientLevels(f"need at least 2 levels, got {len(spec)}")


def weighted_slope(x, y, w=None) -> float:
    """Slope of the (weighted) least-squares line through ``(x, y)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.ones_like(x) if w is None else np.asarray(w, dtype=float)
    xm = np.sum(w * x) / np.sum(w)
    ym = np.sum(w * y) / np.sum(w)
    dx = x - xm
    return float(np.sum(w * dx * (y - ym)) / np.sum(w * dx * dx))


def estimate_ols(spec: WaveletSpectrum, dim: int | None = None) -> HurstEstimate:
    _need_points(spec)
    if spec.bias_mode != BIAS_NONE:
        raise AlreadyCorrected("OLS works on uncorrected log-energies")
    spec = _with_dim(spec, dim)
    return _finish("ols", spec, weighted_slope(spec.levels, spec.y))


def estimate_av(spec: WaveletSpectrum, dim: int | None = None, bias=BIAS_SECOND_ORDER) -> HurstEstimate:
    """Abry-Veitch weighted regression.

    ``bias`` selects the correction applied to an uncorrected spectrum
    (``"second_order"``, ``"exact_digamma"`` or ``None`` to skip it).  A
    spectrum that is already corrected is used as-is.
    """
    _need_points(spec)
    spec = _with_dim(spec, dim)
    if spec.bias_mode == BIAS_NONE:
        spec = apply_bias_correction(spec, bias_mode(bias))
    return _finish("av", spec, weighted_slope(spec.levels, spec.y, av_weight(spec.counts)))


def pairwise_weight(i: int, j: int, dim: int) -> float:
    """``(i - j)**2 * HA(2**(dim*i), 2**(dim*j))`` with ``HA(a, b) = 2ab / (a + b)``."""
    if i == j:
        raise DegeneratePair(f"pair ({i}, {j}) has no slope")
    a = 2.0 ** (dim * i)
    b = 2.0 ** (dim * j)
    return (i - j) ** 2 * 2.0 * a * b / (a + b)


def pair_correction(i: int, j: int, dim: int) -> float:
    """Bias correction added to the slope between levels ``i`` and ``j``."""
    return (2.0 ** (-dim * j) - 2.0 ** (-dim * i)) / ((j - i) * LN2)


def estimate_tt(spec: WaveletSpectrum, dim: int | None = None, correct: bool = True) -> HurstEstimate:
    """Theil-type weighted mean of all bias-corrected pairwise slopes."""
    _need_points(spec)
    if spec.bias_mode != BIAS_NONE:
        raise AlreadyCorrected("TT applies its own pairwise bias correction")
    spec = _with_dim(spec, dim)
    m = spec.dim
    levels = [int(j) for j in spec.levels]
    y = spec.y
    num = den = 0.0
    for a, b in combinations(range(len(levels)), 2):
        i, j = levels[a], levels[b]
        s = (y[b] - y[a]) / (j - i)
        if correct:
            s += pair_correction(i, j, m)
        w = pairwise_weight(i, j, m)
        num += w * s
        den += w
    return _finish("tt", spec, num / den)


_ESTIMATORS = {"ols": estimate_ols, "av": estimate_av, "tt": estimate_tt}


def estimate(spec: WaveletSpectrum, method: str, dim: int | None = None, **kwargs) -> HurstEstimate:
    try:
        fn = _ESTIMATORS[method.lower()]
    except KeyError:
        raise InputError(f"unknown method {method!r}; choose from {', '.join(METHODS)}") from None
    return fn(spec, dim, **kwargs)


def _with_dim(spec, dim):
    if dim is None or dim == spec.dim:
        return spec
    if dim not in (1, 2):
        raise InputError(f"dimension must be 1 or 2, got {dim}")
    return replace(spec, dim=int(dim))
