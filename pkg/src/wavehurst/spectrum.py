"""Directional wavelet spectra: per-level mean energies and their log2.

Spectra are stored in log base 2.  Both bias corrections are expressed in
that base:

* ``second_order``: ``y_j + 1 / (n_j ln 2)``
* ``exact_digamma``: ``y_j - (digamma(n_j / 2) - ln(n_j / 2)) / ln 2``, the exact
  mean of ``log2`` of a chi-square(n_j) / n_j variable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import digamma

from .dwt import Decomposition
from .errors import AlreadyCorrected, DegenerateLevel, InputError, InvalidLevelRange

LN2 = math.log(2.0)
_ROUNDOFF = 1e-13

BIAS_NONE = "none"
BIAS_SECOND_ORDER = "second_order"
BIAS_DIGAMMA = "exact_digamma"
BIAS_MODES = (BIAS_NONE, BIAS_SECOND_ORDER, BIAS_DIGAMMA)

_BIAS_ALIASES = {
    "none": BIAS_NONE,
    "second_order": BIAS_SECOND_ORDER,
    "av": BIAS_SECOND_ORDER,
    "exact_digamma": BIAS_DIGAMMA,
    "digamma": BIAS_DIGAMMA,
}


def bias_mode(name) -> str:
    if name is None:
        return BIAS_NONE
    try:
        return _BIAS_ALIASES[str(name).lower()]
    except KeyError:
        raise InputError(f"unknown bias mode {name!r}") from None


@dataclass(frozen=True)
class WaveletSpectrum:
    direction: str
    dim: int
    levels: np.ndarray
    counts: np.ndarray
    mu: np.ndarray
    y: np.ndarray
    bias_mode: str = BIAS_NONE

    def __len__(self):
        return len(self.levels)

    @property
    def level_range(self) -> tuple[int, int]:
        return int(self.levels[0]), int(self.levels[-1])

    def points(self):
        """Iterate ``(level, count, mu, y)`` tuples."""
        for row in zip(self.levels, self.counts, self.mu, self.y):
            yield int(row[0]), int(row[1]), float(row[2]), float(row[3])


def parse_levels(text) -> tuple[int, int]:
    """Parse ``"3:7"`` (or a 2-sequence) into an inclusive level range."""
    if isinstance(text, str):
        parts = text.replace("-", ":").split(":")
        if len(parts) != 2:
            raise InputError(f"level range must look like 'j1:j2', got {text!r}")
        j1, j2 = (int(p) for p in parts)
    else:
        j1, j2 = (int(v) for v in text)
    if j1 > j2:
        raise InvalidLevelRange(f"empty level range {j1}:{j2}")
    return j1, j2


def default_level_range(side: int) -> tuple[int, int]:
    """Levels ``J-6 .. J-2`` for a side (or length) of ``2**J``.

    Anchoring the range to the finest level keeps the same pixel scales in
    play whatever the image size: (3, 7) at 512, (2, 6) at 256.
    """
    J = int(side).bit_length() - 1
    if J < 6:
        raise InvalidLevelRange(f"side {side} too small for the default level range")
    return J - 6, J - 2


def spectrum_from_points(levels, counts, mu, direction="d", dim=2) -> WaveletSpectrum:
    """Build an uncorrected spectrum from raw (level, count, mean energy) rows."""
    levels = np.asarray(levels, dtype=int)
    counts = np.asarray(counts, dtype=int)
    mu = np.asarray(mu, dtype=float)
    if not (levels.shape == counts.shape == mu.shape) or levels.ndim != 1:
        raise InputError("levels, counts and mu must be 1-D and of equal length")
    if np.any(np.diff(levels) <= 0):
        raise InputError("levels must be strictly increasing")
    if np.any(mu < 0) or not np.all(np.isfinite(mu)):
        raise InputError("mean energies must be finite and non-negative")
    zero = levels[mu == 0]
    if zero.size:
        raise DegenerateLevel(f"zero energy at level(s) {zero.tolist()}; log undefined")
    return WaveletSpectrum(direction, int(dim), levels, counts, mu, np.log2(mu))


def level_energies(decomp: Decomposition, direction: str, level_range) -> WaveletSpectrum:
    """Mean squared detail coefficient per level, ``mu_j = mean(d_jk**2)``."""
    j1, j2 = parse_levels(level_range)
    missing = [j for j in (j1, j2) if j not in decomp.details]
    if missing:
        raise InvalidLevelRange(
            f"level(s) {missing} not in decomposition levels {decomp.levels[0]}..{decomp.levels[-1]}"
        )
    levels = np.arange(j1, j2 + 1)
    counts, mu = [], []
    for j in levels:
        band = decomp.detail(int(j), direction)
        counts.append(band.size)
        mu.append(float(np.mean(np.square(band))))
    # energies at round-off level (e.g. a constant image through a long filter) count as zero
    n_samples = decomp.approx.size * 2 ** (decomp.ndim * (decomp.finest_level + 1 - decomp.j0))
    floor = _ROUNDOFF**2 * decomp.energy() / n_samples
    mu = [0.0 if m <= floor else m for m in mu]
    return spectrum_from_points(levels, counts, mu, direction, decomp.ndim)


def second_order_bias(n):
    """Amount added to ``log2 mu`` by the second-order correction: ``1 / (n ln 2)``."""
    return 1.0 / (np.asarray(n, dtype=float) * LN2)


def exact_bias(n):
    """``E[log2(chi2_n / n)] = (digamma(n/2) - ln(n/2)) / ln 2``; always negative."""
    half = np.asarray(n, dtype=float) / 2.0
    return (digamma(half) - np.log(half)) / LN2


def apply_bias_correction(spec: WaveletSpectrum, mode) -> WaveletSpectrum:
    mode = bias_mode(mode)
    if spec.bias_mode != BIAS_NONE:
        raise AlreadyCorrected(f"spectrum already carries {spec.bias_mode} correction")
    if mode == BIAS_NONE:
        return spec
    if mode == BIAS_SECOND_ORDER:
        y = spec.y + second_order_bias(spec.counts)
    else:
        y = spec.y - exact_bias(spec.counts)
    return replace(spec, y=y, bias_mode=mode)


def av_variance(n):
    """Asymptotic variance ``2 / (n ln^2 2)`` of ``log2 mu_j``."""
    return 2.0 / (np.asarray(n, dtype=float) * LN2**2)


def av_weight(n):
    """Regression weight ``n ln^2 2 / 2``, the reciprocal of :func:`av_variance`."""
    return np.asarray(n, dtype=float) * LN2**2 / 2.0
