"""Two-level nested ANOVA: subjects nested within status.

Status is a fixed effect tested against the subjects-within-status mean
square; subjects are tested against the residual mean square.  Unbalanced
designs use the usual sequential nested sums of squares.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from ..errors import InsufficientGroups


@dataclass(frozen=True)
class AnovaRow:
    source: str
    sum_sq: float
    df: int
    mean_sq: float | None = None
    f: float | None = None
    p: float | None = None


@dataclass(frozen=True)
class AnovaTable:
    rows: tuple

    def __getitem__(self, source) -> AnovaRow:
        for r in self.rows:
            if r.source == source:
                return r
        raise KeyError(source)


def f_pvalue(f, df1, df2) -> float:
    """Upper-tail probability of the F distribution."""
    return float(stats.f.sf(f, df1, df2))


def nested_anova_arrays(values, groups, subjects) -> AnovaTable:
    """Nested ANOVA from flat arrays of responses, group and subject labels."""
    y = np.asarray(values, dtype=float)
    groups = np.asarray(groups)
    subjects = np.asarray(subjects)
    grand = y.mean()
    ss_status = ss_subj = ss_err = 0.0
    n_subjects = 0
    labels = sorted(set(groups.tolist()))
    if len(labels) < 2:
        raise InsufficientGroups("need at least two status groups")
    for g in labels:
        in_g = groups == g
        yg = y[in_g]
        subj_g = subjects[in_g]
        names = sorted(set(subj_g.tolist()))
        if len(names) < 2:
            raise InsufficientGroups(f"status {g!r} has fewer than 2 subjects")
        n_subjects += len(names)
        mg = yg.mean()
        ss_status += yg.size * (mg - grand) ** 2
        for s in names:
            ys = yg[subj_g == s]
            ms = ys.mean()
            ss_subj += ys.size * (ms - mg) ** 2
            ss_err += float(np.sum((ys - ms) ** 2))
    ss_total = float(np.sum((y - grand) ** 2))
    df_status = len(labels) - 1
    df_subj = n_subjects - len(labels)
    df_err = y.size - n_subjects
    ms_status = float(ss_status / df_status)
    ms_subj = float(ss_subj / df_subj)
    ms_err = float(ss_err / df_err) if df_err > 0 else np.nan

    def ratio(a, b):
        return a / b if b > 0 else (np.nan if a == 0 else np.inf)

    f_status = float(ratio(ms_status, ms_subj))
    f_subj = float(ratio(ms_subj, ms_err))
    rows = (
        AnovaRow("Status", float(ss_status), df_status, ms_status, f_status, _p(f_status, df_status, df_subj)),
        AnovaRow("Patients(Status)", float(ss_subj), df_subj, ms_subj, f_subj, _p(f_subj, df_subj, df_err)),
        AnovaRow("Error", ss_err, df_err, ms_err),
        AnovaRow("Total", ss_total, y.size - 1),
    )
    return AnovaTable(rows)


def _p(f, d1, d2):
    if not np.isfinite(f) or d2 <= 0:
        return np.nan if np.isnan(f) else 0.0
    return f_pvalue(f, d1, d2)


def nested_anova(records, feature: str = "hd") -> AnovaTable:
    return nested_anova_arrays(
        [r.feature(feature) for r in records],
        [r.status for r in records],
        [r.subject_id for r in records],
    )
