"""Periodic orthonormal discrete wavelet transform in one and two dimensions.

Level ``j`` holds ``2**j`` translates per axis, so a signal of length ``2**J``
has detail levels ``J0 .. J-1`` plus an approximation of size ``2**J0``.

In two dimensions axis 1 (columns) plays the role of ``t1`` and axis 0 (rows)
of ``t2``.  With that convention the horizontal hierarchy is
``phi(t1) psi(t2)`` (low-pass along columns, high-pass along rows), the
vertical hierarchy ``psi(t1) phi(t2)``, and the diagonal ``psi(t1) psi(t2)``.
Transposing an image therefore swaps ``h`` and ``v``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from .errors import InvalidLevelRange, InvalidShape
from .filters import WaveletFilter, make_filter

DIRECTIONS_2D = ("h", "v", "d")
DIRECTION_1D = "1d"


def dyadic_exponent(n: int) -> int:
    """Return ``J`` with ``n == 2**J``; raise ``InvalidShape`` otherwise."""
    n = int(n)
    if n < 1 or n & (n - 1):
        raise InvalidShape(f"length {n} is not a power of two")
    return n.bit_length() - 1


@dataclass
class Decomposition:
    """Detail subbands keyed by level then direction, plus the approximation."""

    j0: int
    details: dict
    approx: np.ndarray

    ndim: ClassVar[int] = 0
    directions: ClassVar[tuple] = ()

    @property
    def levels(self) -> list[int]:
        return sorted(self.details)

    @property
    def finest_level(self) -> int:
        return max(self.details)

    def detail(self, level: int, direction: str | None = None) -> np.ndarray:
        if level not in self.details:
            raise InvalidLevelRange(
                f"level {level} not in decomposition (levels {self.j0}..{self.finest_level})"
            )
        if direction is None:
            direction = self.directions[-1]
        try:
            return self.details[level][direction]
        except KeyError:
            raise InvalidShape(
                f"direction {direction!r} not available; expected one of {self.directions}"
            ) from None

    def energy(self) -> float:
        total = float(np.sum(self.approx**2))
        for bands in self.details.values():
            for band in bands.values():
                total += float(np.sum(band**2))
        return total

    def copy(self):
        return type(self)(
            self.j0,
            {j: {k: v.copy() for k, v in b.items()} for j, b in self.details.items()},
            self.approx.copy(),
        )


class Decomposition1D(Decomposition):
    ndim = 1
    directions = (DIRECTION_1D,)


class Decomposition2D(Decomposition):
    ndim = 2
    directions = DIRECTIONS_2D


def _analysis(x, h, g, axis):
    """One periodic filter-and-downsample step along ``axis``."""
    x = np.moveaxis(x, axis, -1)
    L = x.shape[-1]
    idx = (2 * np.arange(L // 2)[:, None] + np.arange(h.size)[None, :]) % L
    windows = x[..., idx]
    lo = windows @ h
    hi = windows @ g
    return np.moveaxis(lo, -1, axis), np.moveaxis(hi, -1, axis)


def _synthesis(lo, hi, h, g, axis):
    """Adjoint (and inverse) of :func:`_analysis`."""
    lo = np.moveaxis(lo, axis, -1)
    hi = np.moveaxis(hi, axis, -1)
    half = lo.shape[-1]
    L = 2 * half
    out = np.zeros(lo.shape[:-1] + (L,))
    base = 2 * np.arange(half)
    for n in range(h.size):
        # indices are distinct for a fixed tap, so plain fancy += is safe
        out[..., (base + n) % L] += h[n] * lo + g[n] * hi
    return np.moveaxis(out, -1, axis)


def _check_j0(J, j0):
    if not 0 <= j0 < J:
        raise InvalidLevelRange(f"need 0 <= J0 < J, got J0={j0}, J={J}")


def dwt1d(signal, filt, j0: int = 0) -> Decomposition1D:
    """Mallat cascade of a length ``2**J`` signal down to level ``j0``."""
    filt = make_filter(filt)
    x = np.asarray(signal, dtype=float)
    if x.ndim != 1:
        raise InvalidShape(f"expected a 1-D signal, got shape {x.shape}")
    J = dyadic_exponent(x.size)
    j0 = int(j0)
    _check_j0(J, j0)
    details = {}
    approx = x
    for j in range(J - 1, j0 - 1, -1):
        approx, d = _analysis(approx, filt.lowpass, filt.highpass, 0)
        details[j] = {DIRECTION_1D: d}
    return Decomposition1D(j0, dict(sorted(details.items())), approx)


def idwt1d(decomp: Decomposition1D, filt) -> np.ndarray:
    filt = make_filter(filt)
    x = np.asarray(decomp.approx, dtype=float)
    if x.shape != (2**decomp.j0,):
        raise InvalidShape(f"approximation shape {x.shape} does not match J0={decomp.j0}")
    for j in range(decomp.j0, decomp.j0 + len(decomp.details)):
        d = np.asarray(decomp.detail(j, DIRECTION_1D), dtype=float)
        if d.shape != x.shape:
            raise InvalidShape(f"level {j} detail has shape {d.shape}, expected {x.shape}")
        x = _synthesis(x, d, filt.lowpass, filt.highpass, 0)
    return x


def dwt2d(grid, filt, j0: int = 0) -> Decomposition2D:
    """Separable periodic 2-D DWT of a square ``2**J`` grid down to level ``j0``."""
    filt = make_filter(filt)
    x = np.asarray(grid, dtype=float)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise InvalidShape(f"expected a square grid, got shape {x.shape}")
    J = dyadic_exponent(x.shape[0])
    j0 = int(j0)
    _check_j0(J, j0)
    h, g = filt.lowpass, filt.highpass
    details = {}
    approx = x
    for j in range(J - 1, j0 - 1, -1):
        lo1, hi1 = _analysis(approx, h, g, 1)
        approx, dh = _analysis(lo1, h, g, 0)
        dv, dd = _analysis(hi1, h, g, 0)
        details[j] = {"h": dh, "v": dv, "d": dd}
    return Decomposition2D(j0, dict(sorted(details.items())), approx)


def idwt2d(decomp: Decomposition2D, filt) -> np.ndarray:
    filt = make_filter(filt)
    h, g = filt.lowpass, filt.highpass
    x = np.asarray(decomp.approx, dtype=float)
    side = 2**decomp.j0
    if x.shape != (side, side):
        raise InvalidShape(f"approximation shape {x.shape} does not match J0={decomp.j0}")
    for j in range(decomp.j0, decomp.j0 + len(decomp.details)):
        bands = [np.asarray(decomp.detail(j, k), dtype=float) for k in DIRECTIONS_2D]
        for k, b in zip(DIRECTIONS_2D, bands):
            if b.shape != x.shape:
                raise InvalidShape(f"level {j} subband {k} has shape {b.shape}, expected {x.shape}")
        dh, dv, dd = bands
        lo1 = _synthesis(x, dh, h, g, 0)
        hi1 = _synthesis(dv, dd, h, g, 0)
        x = _synthesis(lo1, hi1, h, g, 1)
    return x


def dwt(data, filt, j0: int = 0) -> Decomposition:
    """Dispatch to :func:`dwt1d` or :func:`dwt2d` on the input's dimension."""
    arr = np.asarray(data)
    return dwt1d(arr, filt, j0) if arr.ndim == 1 else dwt2d(arr, filt, j0)


def idwt(decomp: Decomposition, filt) -> np.ndarray:
    return idwt1d(decomp, filt) if decomp.ndim == 1 else idwt2d(decomp, filt)
