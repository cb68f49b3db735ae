"""Exact-law simulation of fractional Brownian motion and fields.

One-dimensional paths are built from circulant embedding of fractional
Gaussian noise followed by a cumulative sum.  Two-dimensional fields use
Stein's (2002) embedding of a compactly supported stationary covariance whose
increments match those of fBm, corrected by a random linear term.  The
embedding lattice is refined so that all target points lie within unit
distance of each other, then rescaled to the requested spacing using
self-similarity.  A dense
Cholesky factorisation of the exact covariance is available for small grids
and as a fallback.

Sampling grid: ``t_k = k / 2**J`` for ``k = 0 .. 2**J - 1`` on each axis, with
the process pinned to zero at the origin.  ``include_endpoint=True`` appends
``t = 1`` (one extra sample per axis) which is handy for checking the law.
"""
from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .dwt import Decomposition, dyadic_exponent
from .errors import EmbeddingFailure, InputError, InvalidHurst, InvalidLevelRange
from .rng import stream

CHOLESKY_MAX_SIDE = 128

# relative size of negative circulant eigenvalues treated as round-off
_EIG_TOL = 1e-10


def _check_hurst(hurst):
    if not (0.0 < hurst < 1.0) or not math.isfinite(hurst):
        raise InvalidHurst(f"Hurst exponent must lie in (0, 1), got {hurst}")


@dataclass(frozen=True)
class SynthesisSpec:
    hurst: float
    dim: int = 2
    size: int = 512
    sigma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        _check_hurst(self.hurst)
        if self.dim not in (1, 2):
            raise InputError(f"dimension must be 1 or 2, got {self.dim}")
        dyadic_exponent(self.size)
        if self.size < 2:
            raise InputError("size must be at least 2")
        if not self.sigma > 0:
            raise InputError(f"sigma must be positive, got {self.sigma}")


def fbm_cov(t, s, hurst: float, sigma: float = 1.0) -> float:
    """Covariance ``sigma**2/2 (|t|^2H + |s|^2H - |t-s|^2H)`` of (multi-parameter) fBm."""
    _check_hurst(hurst)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    s = np.atleast_1d(np.asarray(s, dtype=float))
    a = 2.0 * hurst
    nt, ns, nd = np.linalg.norm(t), np.linalg.norm(s), np.linalg.norm(t - s)
    return 0.5 * sigma**2 * (nt**a + ns**a - nd**a)


# ---------------------------------------------------------------------------
# 1-D


@lru_cache(maxsize=32)
def _fgn_sqrt_eigs(n: int, hurst: float) -> np.ndarray:
    a = 2.0 * hurst
    k = np.arange(n + 1, dtype=float)
    gamma = 0.5 * (np.abs(k + 1) ** a - 2 * k**a + np.abs(k - 1) ** a)
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    lam = np.fft.fft(row).real
    if lam.min() < -_EIG_TOL * lam.max():
        raise EmbeddingFailure(f"fGn circulant embedding not positive semidefinite (H={hurst}, n={n})")
    lam = np.clip(lam, 0.0, None)
    out = np.sqrt(lam / row.size)
    out.setflags(write=False)
    return out


def synth_fbm_1d(spec: SynthesisSpec, include_endpoint: bool = False) -> np.ndarray:
    """Sample fBm on ``k / N``, ``k = 0 .. N-1`` (``.. N`` with the endpoint)."""
    if spec.dim != 1:
        raise InputError("synth_fbm_1d needs a 1-D spec")
    n = spec.size
    rng = stream(spec.seed)
    root = _fgn_sqrt_eigs(n, float(spec.hurst))
    z = rng.standard_normal(root.size) + 1j * rng.standard_normal(root.size)
    incr = np.fft.fft(root * z).real[:n]
    incr *= spec.sigma * float(n) ** (-spec.hurst)
    path = np.concatenate([[0.0], np.cumsum(incr)])
    return path if include_endpoint else path[:n]


# ---------------------------------------------------------------------------
# 2-D


def _stein_params(alpha):
    """Support radius and polynomial coefficients of Stein's embedding covariance."""
    if alpha <= 1.5:
        R, beta = 1.0, 0.0
        c2 = alpha / 2.0
        c0 = 1.0 - alpha / 2.0
    else:
        R = 2.0
        beta = alpha * (2.0 - alpha) / (3.0 * R * (R**2 - 1.0))
        c2 = (alpha - beta * (R - 1.0) ** 2 * (R + 2.0)) / 2.0
        c0 = beta * (R - 1.0) ** 3 + 1.0 - c2
    return R, beta, c0, c2


def _stein_cov(r, alpha):
    R, beta, c0, c2 = _stein_params(alpha)
    out = np.zeros_like(r)
    inner = r <= 1.0
    out[inner] = c0 - r[inner] ** alpha + c2 * r[inner] ** 2
    if R > 1.0:
        mid = (r > 1.0) & (r <= R)
        out[mid] = beta * (R - r[mid]) ** 3 / r[mid]
    return out


def _fft_friendly(n: int) -> int:
    """Smallest 5-smooth integer >= n."""
    while True:
        m = n
        for p in (2, 3, 5):
            while m % p == 0:
                m //= p
        if m == 1:
            return n
        n += 1


def _embedding_resolution(n: int) -> int:
    # The polynomial branch of Stein's covariance holds only for r <= 1, so every
    # pair of target points must be within unit distance: n * sqrt(2) / M <= 1.
    return _fft_friendly(math.ceil(n * math.sqrt(2.0)))


@lru_cache(maxsize=8)
def _stein_sqrt_eigs(M: int, hurst: float) -> np.ndarray:
    alpha = 2.0 * hurst
    R = _stein_params(alpha)[0]
    m = int(round(R * M))
    t = np.arange(m + 1) / M
    quadrant = _stein_cov(np.hypot(t[:, None], t[None, :]), alpha)
    mirror = np.concatenate([np.arange(m + 1), np.arange(m - 1, 0, -1)])
    full = quadrant[np.ix_(mirror, mirror)]
    lam = np.fft.fft2(full).real
    if lam.min() < -_EIG_TOL * lam.max():
        raise EmbeddingFailure(
            f"2-D circulant embedding not positive semidefinite (H={hurst}, M={M})"
        )
    out = np.sqrt(np.clip(lam, 0.0, None) / full.size)
    out.setflags(write=False)
    return out


def _fbf_circulant(n, hurst, rng, npts):
    M = _embedding_resolution(n)
    root = _stein_sqrt_eigs(M, float(hurst))
    z = rng.standard_normal(root.shape) + 1j * rng.standard_normal(root.shape)
    y = np.fft.fft2(root * z).real[:npts, :npts]
    c2 = _stein_params(2.0 * hurst)[3]
    t = np.arange(npts) / M
    z1, z2 = rng.standard_normal(2)
    # axis 1 is t1, axis 0 is t2
    ramp = math.sqrt(2.0 * c2) * (t[None, :] * z1 + t[:, None] * z2)
    # variogram is 2 |t - s|^2H on the 1/M lattice; halve it and stretch to 1/n
    # spacing by self-similarity
    return (y - y[0, 0] + ramp) * ((M / n) ** hurst / math.sqrt(2.0))


@lru_cache(maxsize=4)
def _fbf_cholesky_factor(n: int, hurst: float, npts: int) -> np.ndarray:
    t = np.arange(npts) / n
    t2, t1 = np.meshgrid(t, t, indexing="ij")
    pts = np.column_stack([t1.ravel(), t2.ravel()])[1:]
    a = 2.0 * hurst
    norms = np.linalg.norm(pts, axis=1) ** a
    diff = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1) ** a
    cov = 0.5 * (norms[:, None] + norms[None, :] - diff)
    try:
        factor = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise EmbeddingFailure(f"fBf covariance not positive definite (H={hurst}, side={n})") from exc
    factor.setflags(write=False)
    return factor


def _fbf_cholesky(n, hurst, rng, npts):
    if n > CHOLESKY_MAX_SIDE:
        raise EmbeddingFailure(f"Cholesky synthesis limited to side <= {CHOLESKY_MAX_SIDE}")
    factor = _fbf_cholesky_factor(n, float(hurst), npts)
    values = factor @ rng.standard_normal(factor.shape[0])
    return np.concatenate([[0.0], values]).reshape(npts, npts)


def synth_fbf_2d(
    spec: SynthesisSpec, method: str = "circulant", include_endpoint: bool = False
) -> np.ndarray:
    """Isotropic fractional Brownian field on ``[0, 1)^2``, pinned to 0 at the origin.

    ``method`` is ``"circulant"`` (default; falls back to Cholesky when the
    embedding fails and the grid is small enough) or ``"cholesky"``.
    Row index is ``t2``, column index ``t1``.
    """
    if spec.dim != 2:
        raise InputError("synth_fbf_2d needs a 2-D spec")
    n = spec.size
    npts = n + 1 if include_endpoint else n
    rng = stream(spec.seed)
    if method == "circulant":
        try:
            field = _fbf_circulant(n, spec.hurst, rng, npts)
        except EmbeddingFailure:
            if n > CHOLESKY_MAX_SIDE:
                raise
            field = _fbf_cholesky(n, spec.hurst, stream(spec.seed), npts)
    elif method == "cholesky":
        field = _fbf_cholesky(n, spec.hurst, rng, npts)
    else:
        raise InputError(f"unknown synthesis method {method!r}")
    return spec.sigma * field


def synthesize(spec: SynthesisSpec, **kwargs) -> np.ndarray:
    if spec.dim == 1:
        return synth_fbm_1d(spec, **{k: v for k, v in kwargs.items() if k != "method"})
    return synth_fbf_2d(spec, **kwargs)


# ---------------------------------------------------------------------------
# contamination

MATCH_ENERGY = "match-average-energy"


@dataclass(frozen=True)
class ContaminationSpec:
    """White-noise injection into one decomposition level.

    ``variance`` is :data:`MATCH_ENERGY` (noise variance equals the
    subband's own mean squared coefficient), an explicit non-negative number,
    or a mapping from direction to explicit variance.  ``directions=None``
    targets every direction at the level.
    """

    target_level: int = 3
    directions: tuple | None = None
    variance: float | str | Mapping = MATCH_ENERGY
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.variance, str):
            if self.variance != MATCH_ENERGY:
                raise InputError(f"unknown contamination scale rule {self.variance!r}")
        elif isinstance(self.variance, Mapping):
            if any(not v >= 0 for v in self.variance.values()):
                raise InputError("explicit contamination variance must be >= 0")
        elif not self.variance >= 0:
            raise InputError("explicit contamination variance must be >= 0")

    def variance_for(self, direction, band) -> float:
        if isinstance(self.variance, str):
            return float(np.mean(band**2))
        if isinstance(self.variance, Mapping):
            try:
                return float(self.variance[direction])
            except KeyError:
                raise InputError(f"no contamination variance given for direction {direction!r}") from None
        return float(self.variance)


def contaminate(decomp: Decomposition, spec: ContaminationSpec) -> Decomposition:
    """Return a copy of ``decomp`` with Gaussian noise added at one level.

    Untouched subbands are shared with the input, not copied.
    """
    level = spec.target_level
    if level not in decomp.details:
        raise InvalidLevelRange(
            f"contamination level {level} outside decomposition levels {decomp.levels}"
        )
    directions = decomp.directions if spec.directions is None else tuple(spec.directions)
    for d in directions:
        if d not in decomp.directions:
            raise InputError(f"direction {d!r} not in {decomp.directions}")
    rng = stream(spec.seed)
    details = dict(decomp.details)
    bands = dict(details[level])
    # iterate in the canonical order so draws do not depend on how the caller listed directions
    for d in decomp.directions:
        if d not in directions:
            continue
        band = bands[d]
        var = spec.variance_for(d, band)
        noise = rng.standard_normal(band.shape)
        bands[d] = band + math.sqrt(var) * noise if var > 0 else band.copy()
    details[level] = bands
    return type(decomp)(decomp.j0, details, decomp.approx)
