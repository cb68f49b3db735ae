"""Patch extraction and per-patch directional Hurst features."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dwt import DIRECTIONS_2D, dwt2d
from ..errors import InputError, InsufficientExtent
from ..estimators import estimate
from ..spectrum import default_level_range, level_energies

STATUSES = ("cancer", "normal")


@dataclass(frozen=True)
class PatchLayout:
    """Where the five patches sit inside an image.

    By default the patches are the four corners of the bounding box, each
    moved ``inset`` pixels towards the interior, plus one centred patch.
    ``positions`` overrides this with explicit top-left ``(row, col)``
    offsets.
    """

    patch_size: int = 1024
    inset: int = 0
    positions: tuple | None = None

    def offsets(self, shape) -> list[tuple[int, int]]:
        rows, cols = shape
        p, e = self.patch_size, self.inset
        if self.positions is not None:
            out = [(int(r), int(c)) for r, c in self.positions]
        else:
            if rows < p + 2 * e or cols < p + 2 * e:
                raise InsufficientExtent(
                    f"image {rows}x{cols} cannot hold {p}x{p} patches with inset {e}"
                )
            bottom, right = rows - p - e, cols - p - e
            out = [
                (e, e),
                (e, right),
                (bottom, e),
                (bottom, right),
                ((rows - p) // 2, (cols - p) // 2),
            ]
        for r, c in out:
            if r < 0 or c < 0 or r + p > rows or c + p > cols:
                raise InsufficientExtent(f"patch at ({r}, {c}) of size {p} leaves the {rows}x{cols} image")
        return out


def parse_layout(text: str) -> PatchLayout:
    """Read a layout file.

    Lines are either ``patch_size=N`` / ``inset=N`` settings or ``row,col``
    offsets; ``#`` starts a comment.
    """
    settings, positions = {}, []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line:
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in ("patch_size", "inset"):
                raise InputError(f"unknown layout key {key!r}")
            settings[key] = int(value)
        else:
            r, c = line.split(",")
            positions.append((int(r), int(c)))
    return PatchLayout(positions=tuple(positions) or None, **settings)


def extract_patches(image, layout: PatchLayout | None = None) -> list[np.ndarray]:
    layout = layout or PatchLayout()
    img = np.asarray(image, dtype=float)
    if img.ndim != 2:
        raise InputError(f"expected a 2-D image, got shape {img.shape}")
    p = layout.patch_size
    return [img[r : r + p, c : c + p].copy() for r, c in layout.offsets(img.shape)]


def image_hurst(patch, filt="sym8", level_range=None, method="tt", j0: int = 0):
    """Directional estimates ``(H_d, H_h, H_v)`` of a square patch."""
    patch = np.asarray(patch, dtype=float)
    decomp = dwt2d(patch, filt, j0)
    levels = level_range if level_range is not None else default_level_range(patch.shape[0])
    out = {d: estimate(level_energies(decomp, d, levels), method).hurst for d in DIRECTIONS_2D}
    return out["d"], out["h"], out["v"]


@dataclass(frozen=True)
class SampleRecord:
    subject_id: str
    status: str
    patch_index: int
    hd: float
    hh: float
    hv: float

    def __post_init__(self):
        if not 1 <= self.patch_index <= 5:
            raise InputError(f"patch_index must be in 1..5, got {self.patch_index}")
        if self.status not in STATUSES:
            raise InputError(f"status must be one of {STATUSES}, got {self.status!r}")

    def feature(self, name: str) -> float:
        try:
            return getattr(self, {"hd": "hd", "hh": "hh", "hv": "hv"}[name.lower()])
        except KeyError:
            raise InputError(f"unknown feature {name!r}; use hd, hh or hv") from None


def image_records(subject_id, status, image, layout=None, **hurst_kw) -> list[SampleRecord]:
    """Five feature rows for one subject image."""
    rows = []
    for k, patch in enumerate(extract_patches(image, layout), 1):
        hd, hh, hv = image_hurst(patch, **hurst_kw)
        rows.append(SampleRecord(str(subject_id), status, k, hd, hh, hv))
    return rows
