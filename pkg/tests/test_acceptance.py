"""Acceptance criteria 1-9, each reported as one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s``; the lines are also
collected into the terminal summary.
"""
import math
import time

import numpy as np
import pytest

from wavehurst.cli import main as cli_main
from wavehurst.dwt import dwt1d, dwt2d, idwt1d, idwt2d
from wavehurst.estimators import estimate_av, estimate_ols, estimate_tt, pairwise_weight
from wavehurst.filters import FILTER_NAMES
from wavehurst.harness.anova import nested_anova
from wavehurst.harness.classify import classify_cv, fit_logistic, subject_table
from wavehurst.harness.cohort import synthetic_cohort
from wavehurst.harness.simulation import ExperimentConfig, run_simulation
from wavehurst.spectrum import av_variance, exact_bias, second_order_bias, spectrum_from_points
from wavehurst.synthesis import SynthesisSpec, fbm_cov, synth_fbf_2d, synth_fbm_1d

LN2 = math.log(2)


class Clock:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start


def mc_z(a, b, target):
    prod = a * b
    return abs(prod.mean() - target) / (prod.std(ddof=1) / math.sqrt(prod.size))


# --- 1 ------------------------------------------------------------------------


def test_criterion_1_transform(report_criterion):
    rng = np.random.default_rng(1)
    worst_rec = worst_energy = 0.0
    with Clock() as clock:
        for name in FILTER_NAMES:
            for _ in range(100):
                x = rng.standard_normal(512)
                d = dwt1d(x, name)
                worst_rec = max(worst_rec, np.max(np.abs(idwt1d(d, name) - x)))
                worst_energy = max(worst_energy, abs(d.energy() - np.sum(x**2)) / np.sum(x**2))
                g = rng.standard_normal((64, 64))
                d = dwt2d(g, name)
                worst_rec = max(worst_rec, np.max(np.abs(idwt2d(d, name) - g)))
                worst_energy = max(worst_energy, abs(d.energy() - np.sum(g**2)) / np.sum(g**2))
    ok = worst_rec < 1e-10 and worst_energy < 1e-9 and clock.seconds < 10
    report_criterion(1, ok, f"max rec err {worst_rec:.2e}, max rel energy err {worst_energy:.2e}, {clock.seconds:.1f}s")
    assert ok


# --- 2 ------------------------------------------------------------------------


def test_criterion_2_noiseless_identity(report_criterion):
    worst = 0.0
    with Clock() as clock:
        for h in (0.3, 0.5, 0.7):
            for m in (1, 2):
                levels = np.arange(2, 9)
                y = -(2 * h + m) * levels + 0.37
                spec = spectrum_from_points(levels, 2 ** (m * levels), 2.0**y, dim=m)
                for est in (estimate_ols(spec), estimate_av(spec, bias=None), estimate_tt(spec, correct=False)):
                    worst = max(worst, abs(est.hurst - h))
    ok = worst < 1e-10 and clock.seconds < 1
    report_criterion(2, ok, f"max |H - H_true| {worst:.1e}, {clock.seconds:.3f}s")
    assert ok


# --- 3 and 4 share one run: the contaminated arm reuses the clean realizations ---------


@pytest.fixture(scope="module")
def one_d_study():
    cfg = ExperimentConfig(dim=1, hurst=(0.5,), size=512, level_range=(3, 7), contamination_level=3, replicates=100)
    with Clock() as clock:
        report = run_simulation(cfg)
    return report, clock.seconds


def test_criterion_3_table1(report_criterion, one_d_study):
    report, seconds = one_d_study
    tt = report.cell(filter="haar", method="tt", arm="clean")
    ols = report.cell(filter="haar", method="ols", arm="clean")
    ok = (
        abs(tt.mean - 0.454) <= 0.05
        and 0.0035 <= tt.mse <= 0.014
        and abs(ols.mean - 0.434) <= 0.05
        and seconds < 120
    )
    report_criterion(
        3, ok, f"TT mean {tt.mean:.3f} mse {tt.mse:.4f}; OLS mean {ols.mean:.3f}; study {seconds:.1f}s"
    )
    assert ok


def test_criterion_4_table2_ordering(report_criterion, one_d_study):
    report, seconds = one_d_study
    parts, ok = [], seconds < 180
    for f in FILTER_NAMES:
        tt = report.cell(filter=f, method="tt", arm="contaminated")
        ols = report.cell(filter=f, method="ols", arm="contaminated")
        good = tt.mse < ols.mse and abs(tt.mean - 0.5) < abs(ols.mean - 0.5)
        ok &= good
        parts.append(f"{f}: TT {tt.mean:.3f}/{tt.mse:.4f} OLS {ols.mean:.3f}/{ols.mse:.4f}")
    report_criterion(4, ok, "; ".join(parts))
    assert ok


# --- 5 ------------------------------------------------------------------------


def test_criterion_5_two_d_robustness(report_criterion):
    # 256 side: default levels (2, 6); the coarse default level 2 is contaminated
    cfg = ExperimentConfig(
        dim=2, hurst=(0.5,), size=256, filters=("daub6",), methods=("ols", "tt"), directions=("d",),
        contamination_level=2, replicates=30,
    )
    with Clock() as clock:
        report = run_simulation(cfg)
    tt = report.cell(method="tt", arm="contaminated")
    ols = report.cell(method="ols", arm="contaminated")
    ok = abs(tt.mean - 0.473) <= 0.08 and tt.mse <= ols.mse and clock.seconds < 900
    report_criterion(
        5, ok, f"levels {cfg.levels}, TT d mean {tt.mean:.3f} mse {tt.mse:.4f}; OLS mse {ols.mse:.4f}; {clock.seconds:.1f}s"
    )
    assert ok


# --- 6 ------------------------------------------------------------------------


def test_criterion_6_synthesis_law(report_criterion):
    with Clock() as clock:
        paths = np.array(
            [synth_fbm_1d(SynthesisSpec(0.7, dim=1, size=64, seed=s), include_endpoint=True) for s in range(10_000)]
        )
        z1 = [mc_z(paths[:, k], paths[:, k], (k / 64) ** 1.4) for k in (16, 32, 64)]

        n = 64
        fields = np.array(
            [synth_fbf_2d(SynthesisSpec(0.5, size=n, seed=s), include_endpoint=True) for s in range(2000)]
        )
        pairs = [((64, 0), (64, 0)), ((0, 64), (0, 64)), ((32, 32), (64, 64)), ((16, 48), (48, 16)), ((64, 64), (64, 64))]
        z2 = []
        for (c1, r1), (c2, r2) in pairs:
            target = fbm_cov((c1 / n, r1 / n), (c2 / n, r2 / n), 0.5)
            z2.append(mc_z(fields[:, r1, c1], fields[:, r2, c2], target))

        inc = np.diff(synth_fbm_1d(SynthesisSpec(0.5, dim=1, size=16384, seed=1), include_endpoint=True))[:10_000]
        inc -= inc.mean()
        rho = float(np.dot(inc[:-1], inc[1:]) / np.dot(inc, inc))
    ok = max(z1) < 3 and max(z2) < 3 and abs(rho) < 4 / math.sqrt(inc.size) and clock.seconds < 300
    report_criterion(
        6, ok, f"1-D max z {max(z1):.2f}, 2-D max z {max(z2):.2f}, lag-1 rho {rho:+.4f}, {clock.seconds:.1f}s"
    )
    assert ok


# --- 7 ------------------------------------------------------------------------


def test_criterion_7_formulas(report_criterion):
    checks = [
        abs(pairwise_weight(3, 4, 2) - 102.4) < 1e-12,
        abs(pairwise_weight(3, 5, 2) - 4 * 2 * 64 * 1024 / (64 + 1024)) < 1e-12,
        abs(second_order_bias(64) - 1 / (64 * LN2)) < 1e-12,
        abs(round(float(second_order_bias(64)), 6) - 0.022542) < 1e-12,
        abs(av_variance(2) - 1 / LN2**2) < 1e-12,
    ]
    zs = []
    rng = np.random.default_rng(7)
    for n in (4, 64, 1024):
        y = np.log2(rng.chisquare(n, size=100_000) / n)
        zs.append(abs(y.mean() - exact_bias(n)) / (y.std(ddof=1) / math.sqrt(y.size)))
    ok = all(checks) and max(zs) < 3
    report_criterion(7, ok, f"{sum(checks)}/{len(checks)} hand values, digamma z = {', '.join(f'{z:.2f}' for z in zs)}")
    assert ok


# --- 8 ------------------------------------------------------------------------


def pair_count_auc(scores, labels):
    pos, neg = scores[labels == 1], scores[labels == 0]
    diff = pos[:, None] - neg[None, :]
    return float(np.mean((diff > 0) + 0.5 * (diff == 0)))


def test_criterion_8_classification(report_criterion):
    with Clock() as clock:
        distinct = synthetic_cohort({"cancer": 0.45, "normal": 0.65}, n_per_class=50, seed=11, filt="daub6")
        same = synthetic_cohort({"cancer": 0.5, "normal": 0.5}, n_per_class=50, seed=12, filt="daub6")
        sep = classify_cv(distinct, ("hd",), folds=4, repetitions=30, seed=1)
        null = classify_cv(same, ("hd",), folds=4, repetitions=30, seed=1)

        table = nested_anova(distinct, "hd")
        closure = abs(sum(table[s].sum_sq for s in ("Status", "Patients(Status)", "Error")) - table["Total"].sum_sq)

        _, X, y = subject_table(same, ["hd"])
        model = fit_logistic(X, y)
        auc_gap = abs(model.auc - pair_count_auc(model.probabilities, y))
    ok = (
        sep.auc > 0.9
        and abs(null.total - 0.5) <= 0.06
        and closure < 1e-9
        and auc_gap < 1e-12
        and clock.seconds < 600
    )
    report_criterion(
        8, ok,
        f"AUC(0.45 vs 0.65) {sep.auc:.3f}; null total {null.total:.3f}; SS gap {closure:.1e}; "
        f"AUC gap {auc_gap:.1e}; {clock.seconds:.1f}s",
    )
    assert ok


# --- 9 ------------------------------------------------------------------------


def _cli_outputs(workdir, workers, capsys):
    def run(*argv):
        assert cli_main([str(a) for a in argv]) == 0, argv

    w = workers
    (workdir / "exp.cfg").write_text(
        "dim = 1\nsize = 128\nlevels = 2:5\nfilters = haar, sym8\nreplicates = 4\ncontamination_level = 2\nseed = 3\n"
    )
    run("synth", "--hurst", 0.35, "--size", 64, "--seed", 4, "--out", workdir / "f.csv")
    run("synth", "--hurst", 0.35, "--size", 64, "--seed", 4, "--out", workdir / "f.pgm")
    run("dwt", "--in", workdir / "f.csv", "--filter", "coif4", "--out", workdir / "dec")
    run("spectrum", "--in", workdir / "dec", "--levels", "1:4", "--bias", "av", "--out", workdir / "s.csv")
    capsys.readouterr()
    run("estimate", "--in", workdir / "s.csv", "--method", "av")
    (workdir / "estimate.csv").write_text(capsys.readouterr().out)
    run("simstudy", "--config", workdir / "exp.cfg", "--workers", w, "--out", workdir / "sim.csv")
    run("cohort", "--subjects", 4, "--image-side", 128, "--patch-size", 64, "--levels", "1:4",
        "--workers", w, "--out", workdir / "cohort.csv")
    (workdir / "manifest.csv").write_text("subject_id,status,path\na,cancer,f.pgm\n")
    run("features", "--manifest", workdir / "manifest.csv", "--patch-size", 32, "--levels", "1:3",
        "--out", workdir / "feat.csv")
    run("classify", "--records", workdir / "cohort.csv", "--folds", 2, "--reps", 3, "--workers", w,
        "--out", workdir / "metrics.csv")
    run("anova", "--records", workdir / "cohort.csv", "--out", workdir / "anova.csv")
    return {str(p.relative_to(workdir)): p.read_bytes() for p in sorted(workdir.rglob("*")) if p.is_file()}


def test_criterion_9_determinism(report_criterion, tmp_path, capsys):
    runs = []
    for k, workers in enumerate((1, 1, 2)):
        d = tmp_path / f"run{k}"
        d.mkdir()
        runs.append(_cli_outputs(d, workers, capsys))
    ok = runs[0] == runs[1] == runs[2]
    report_criterion(9, ok, f"{len(runs[0])} output files byte-identical over 2 runs and worker counts 1/2")
    assert ok
