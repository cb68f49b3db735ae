"""Logistic classification of subjects from Hurst features.

Subjects (not patches) are the classification unit: each subject's feature
vector is the mean over its patches, which is the fitted value of the
nested model.  Cross-validation folds are drawn per class at the subject
level so a subject's patches never straddle train and test.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from ..errors import InputError, InsufficientGroups
from ..rng import stream

POSITIVE = "cancer"

MAX_ITER = 100
LOGLIK_TOL = 1e-10


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auc: float
    youden_threshold: float
    youden_index: float


def roc_curve(scores, labels) -> RocCurve:
    """Threshold sweep; a case is called positive when ``score >= threshold``.

    The curve starts at (0, 0) with an infinite threshold and steps through
    each distinct score in decreasing order.  Tied scores move both rates
    at once, so the trapezoid AUC equals the Mann-Whitney statistic with
    ties counted as one half.
    """
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels).astype(bool)
    n_pos, n_neg = int(y.sum()), int((~y).sum())
    if n_pos == 0 or n_neg == 0:
        raise InsufficientGroups("ROC needs both classes")
    order = np.argsort(-s, kind="mergesort")
    s, y = s[order], y[order]
    last_of_run = np.r_[np.diff(s) != 0, True]
    tp = np.cumsum(y)[last_of_run]
    fp = np.cumsum(~y)[last_of_run]
    tpr = np.r_[0.0, tp / n_pos]
    fpr = np.r_[0.0, fp / n_neg]
    thresholds = np.r_[np.inf, s[last_of_run]]
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))
    j = tpr - fpr
    best = int(np.argmax(j))
    return RocCurve(fpr, tpr, thresholds, auc, float(thresholds[best]), float(j[best]))


@dataclass
class LogisticModel:
    intercept: float
    coef: np.ndarray
    probabilities: np.ndarray
    loglik: float
    iterations: int
    converged: bool
    separated: bool = False
    roc: RocCurve | None = field(default=None, repr=False)

    @property
    def auc(self) -> float:
        return self.roc.auc

    @property
    def youden_threshold(self) -> float:
        return self.roc.youden_threshold

    def predict_proba(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.coef.size and x.shape[0] == self.coef.size:
            x = x.T
        return expit(self.intercept + x @ self.coef)


def _loglik(y, eta):
    # log(1 + exp(eta)) computed stably
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def fit_logistic(x, y) -> LogisticModel:
    """Maximum-likelihood logistic regression by iteratively reweighted least squares.

    Stops when the log-likelihood changes by less than 1e-10 or after 100
    iterations.  Perfectly separable data has no finite maximiser; the fit
    then stops as soon as every fitted probability matches its label to
    1e-8 and the model is returned with ``separated=True``.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    y = np.asarray(y, dtype=float)
    if x.shape[0] != y.size:
        raise InputError("feature rows and labels differ in length")
    if y.min() == y.max():
        raise InsufficientGroups("logistic fit needs both classes")
    design = np.column_stack([np.ones(y.size), x])
    beta = np.zeros(design.shape[1])
    eta = design @ beta
    ll = _loglik(y, eta)
    converged = separated = False
    it = 0
    for it in range(1, MAX_ITER + 1):
        p = expit(eta)
        w = np.clip(p * (1.0 - p), 1e-300, None)
        z = eta + (y - p) / w
        sw = np.sqrt(w)
        beta = np.linalg.lstsq(design * sw[:, None], z * sw, rcond=None)[0]
        eta = design @ beta
        new_ll = _loglik(y, eta)
        if np.all(np.abs(expit(eta) - y) < 1e-8):
            separated = True
            ll = new_ll
            break
        if abs(new_ll - ll) < LOGLIK_TOL:
            ll = new_ll
            converged = True
            break
        ll = new_ll
    probs = expit(eta)
    model = LogisticModel(float(beta[0]), beta[1:].copy(), probs, ll, it, converged, separated)
    model.roc = roc_curve(probs, y)
    return model


def decision_boundary(intercept: float, coef: float, p: float) -> float:
    """Feature value at which a one-feature logistic model outputs probability ``p``."""
    return (math.log(p / (1.0 - p)) - intercept) / coef


def subject_table(records, features):
    """Per-subject mean features and labels (1 for the positive status).

    Returns ``(subject_ids, X, y)`` with subjects in first-appearance order.
    """
    features = [f.strip().lower() for f in features]
    order, rows, status = [], {}, {}
    for r in records:
        key = (r.status, r.subject_id)
        if key not in rows:
            order.append(key)
            rows[key] = []
            status[key] = r.status
        rows[key].append([r.feature(f) for f in features])
    X = np.array([np.mean(rows[k], axis=0) for k in order])
    y = np.array([1 if status[k] == POSITIVE else 0 for k in order])
    return [k[1] for k in order], X, y


@dataclass
class CVReport:
    total: float
    specificity: float
    sensitivity: float
    auc: float
    per_repetition: np.ndarray = field(repr=False)

    columns = ("total", "specificity", "sensitivity", "auc")


def assign_folds(y, folds, rng) -> np.ndarray:
    """Stratified fold index per subject."""
    fold = np.empty(y.size, dtype=int)
    for label in (0, 1):
        idx = np.flatnonzero(y == label)
        perm = rng.permutation(idx)
        fold[perm] = np.arange(perm.size) % folds
    return fold


def _one_repetition(args):
    X, y, folds, seed, rep, threshold_mode, global_threshold = args
    rng = stream(seed, rep)
    fold = assign_folds(y, folds, rng)
    prob = np.empty(y.size)
    called = np.empty(y.size, dtype=bool)
    for k in range(folds):
        test = fold == k
        train = ~test
        model = fit_logistic(X[train], y[train])
        cut = global_threshold if threshold_mode == "global" else model.youden_threshold
        prob[test] = model.predict_proba(X[test])
        called[test] = prob[test] >= cut
    pos = y == 1
    total = float(np.mean(called == pos))
    sens = float(np.mean(called[pos]))
    spec = float(np.mean(~called[~pos]))
    auc = roc_curve(prob, y).auc
    return total, spec, sens, auc


def classify_cv(
    records,
    features=("hd",),
    folds: int = 4,
    repetitions: int = 30,
    seed: int = 0,
    threshold: str = "per_fold",
    workers: int = 1,
) -> CVReport:
    """Repeated stratified subject-level k-fold logistic classification.

    ``threshold="per_fold"`` picks the Youden-optimal probability cut on each
    training fold; ``"global"`` uses the cut from a single fit to all subjects.
    """
    if threshold not in ("per_fold", "global"):
        raise InputError(f"threshold must be 'per_fold' or 'global', got {threshold!r}")
    _, X, y = subject_table(records, features)
    for label in (0, 1):
        if np.sum(y == label) < folds:
            raise InsufficientGroups(f"class {label} has fewer than {folds} subjects")
    global_cut = fit_logistic(X, y).youden_threshold if threshold == "global" else None
    tasks = [(X, y, folds, seed, r, threshold, global_cut) for r in range(repetitions)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_one_repetition, tasks))
    else:
        results = [_one_repetition(t) for t in tasks]
    per_rep = np.array(results)
    total, spec, sens, auc = per_rep.mean(axis=0)
    return CVReport(float(total), float(spec), float(sens), float(auc), per_rep)
