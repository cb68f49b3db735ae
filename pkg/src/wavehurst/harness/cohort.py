"""Synthetic two-class cohorts standing in for a screening image archive."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

from ..rng import derive_seed, stream
from ..synthesis import SynthesisSpec, synth_fbf_2d
from .features import PatchLayout, image_records

_CLASS_ORDER = ("cancer", "normal")


def _subject(args):
    status, index, hurst, image_side, layout, seed, subject_sd, hurst_kw = args
    class_key = _CLASS_ORDER.index(status)
    h = hurst
    if subject_sd > 0:
        h = float(min(0.98, max(0.02, hurst + subject_sd * stream(seed, class_key, index, 1).standard_normal())))
    spec = SynthesisSpec(h, 2, image_side, seed=derive_seed(seed, class_key, index, 0))
    field = synth_fbf_2d(spec)
    return image_records(f"{status[0]}{index:03d}", status, field, layout, **hurst_kw)


def synthetic_cohort(
    hurst: dict,
    n_per_class: int = 50,
    image_side: int = 512,
    patch_size: int = 256,
    seed: int = 0,
    subject_sd: float = 0.0,
    workers: int = 1,
    **hurst_kw,
):
    """Feature records for a simulated cohort.

    ``hurst`` maps each status (``"cancer"``, ``"normal"``) to the field Hurst
    exponent.  Each subject contributes one fractional Brownian field of side
    ``image_side``; five patches are cut from it with the default layout and
    scored by :func:`image_hurst` (``hurst_kw`` is passed through).
    ``subject_sd`` adds a Gaussian subject-level jitter to the exponent.
    """
    layout = PatchLayout(patch_size=patch_size)
    tasks = [
        (status, i, float(hurst[status]), image_side, layout, seed, subject_sd, hurst_kw)
        for status in _CLASS_ORDER
        for i in range(n_per_class)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_subject = list(pool.map(_subject, tasks))
    else:
        per_subject = [_subject(t) for t in tasks]
    return [rec for rows in per_subject for rec in rows]
