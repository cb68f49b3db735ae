"""Command-line entry point: ``wavehurst <command> ...``.

Exit status is 0 on success, 2 for invalid input and 3 for numerical
failures.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .dwt import dwt
from .errors import InputError, NumericalError
from .estimators import METHODS, estimate
from .filters import FILTER_NAMES
from .harness.anova import nested_anova
from .harness.classify import CVReport, classify_cv
from .harness.cohort import synthetic_cohort
from .harness.features import PatchLayout, image_records, parse_layout
from .harness.simulation import ExperimentReport, parse_config, run_simulation
from .spectrum import (
    BIAS_NONE,
    apply_bias_correction,
    bias_mode,
    parse_levels,
    spectrum_from_points,
)
from .synthesis import SynthesisSpec, synthesize

log = logging.getLogger("wavehurst")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


def _levels_arg(text):
    try:
        return parse_levels(text)
    except InputError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _list_arg(text):
    return [t.strip().lower() for t in text.split(",") if t.strip()]


# ---------------------------------------------------------------------------


def cmd_dwt(args):
    data = io.read_image(args.input)
    decomp = dwt(data, args.filter, args.j0)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for j, bands in decomp.details.items():
        for d, band in bands.items():
            io.write_matrix(out / f"d_{d}_{j}.csv", band)
    io.write_matrix(out / f"a_{decomp.j0}.csv", decomp.approx)


def cmd_synth(args):
    spec = SynthesisSpec(args.hurst, args.dim, args.size, args.sigma, args.seed)
    field = synthesize(spec) if args.dim == 1 else synthesize(spec, method=args.method)
    out = Path(args.out)
    if out.suffix.lower() == ".pgm":
        if args.dim != 2:
            raise InputError("PGM output needs --dim 2")
        log.warning("PGM output is linearly rescaled to 16-bit integers (lossy)")
        io.write_pgm(out, field)
    else:
        io.write_matrix(out, field)


def _read_decomp_spectrum(directory, direction, levels):
    directory = Path(directory)
    j1, j2 = levels
    counts, mus = [], []
    for j in range(j1, j2 + 1):
        path = directory / f"d_{direction}_{j}.csv"
        if not path.exists():
            raise InputError(f"missing subband file {path}")
        band = np.loadtxt(path, delimiter=",", ndmin=2)
        counts.append(band.size)
        mus.append(float(np.mean(band**2)))
    dim = 1 if direction == "1d" else 2
    return spectrum_from_points(range(j1, j2 + 1), counts, mus, direction, dim)


def cmd_spectrum(args):
    spec = _read_decomp_spectrum(args.input, args.dir, args.levels)
    spec = apply_bias_correction(spec, bias_mode(args.bias))
    io.write_rows(args.out, ("level", "count", "mu", "y"), spec.points())


def cmd_estimate(args):
    # y is recomputed from mu so every method starts from raw log-energies
    import csv

    with open(args.input, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or not {"level", "count", "mu"} <= set(rows[0]):
        raise InputError(f"{args.input}: need columns level,count,mu")
    direction = args.dir or ("1d" if args.dim == 1 else "d")
    spec = spectrum_from_points(
        [int(r["level"]) for r in rows],
        [int(r["count"]) for r in rows],
        [float(r["mu"]) for r in rows],
        direction,
        args.dim,
    )
    est = estimate(spec, args.method)
    io.write_rows(
        sys.stdout,
        ("method", "direction", "slope", "H", "flags"),
        [(est.method, est.direction, est.slope, est.hurst, ";".join(est.flags))],
    )


def write_report(path, report: ExperimentReport):
    io.write_rows(
        path,
        report.columns,
        ([getattr(r, c) for c in report.columns] for r in report.rows),
    )


def cmd_simstudy(args):
    config = parse_config(Path(args.config).read_text())
    report = run_simulation(config, workers=args.workers)
    write_report(args.out, report)


def write_metrics(path, report: CVReport):
    io.write_rows(path, CVReport.columns, [[getattr(report, c) for c in CVReport.columns]])


def cmd_classify(args):
    records = io.read_records(args.records)
    report = classify_cv(
        records, args.features, args.folds, args.reps, args.seed, args.threshold, args.workers
    )
    write_metrics(args.out, report)


def cmd_anova(args):
    table = nested_anova(io.read_records(args.records), args.feature)
    io.write_rows(
        args.out,
        ("source", "sum_sq", "df", "mean_sq", "F", "p"),
        ([r.source, r.sum_sq, r.df, "" if r.mean_sq is None else r.mean_sq,
          "" if r.f is None else r.f, "" if r.p is None else r.p] for r in table.rows),
    )


def cmd_features(args):
    import csv

    layout = parse_layout(Path(args.layout).read_text()) if args.layout else PatchLayout(args.patch_size)
    records = []
    with open(args.manifest, newline="") as fh:
        for row in csv.DictReader(fh):
            image = io.read_image(Path(args.manifest).parent / row["path"])
            records += image_records(
                row["subject_id"], row["status"].strip().lower(), image, layout,
                filt=args.filter, level_range=args.levels, method=args.method,
            )
    io.write_records(args.out, records)


def cmd_cohort(args):
    records = synthetic_cohort(
        {"cancer": args.h_cancer, "normal": args.h_normal},
        n_per_class=args.subjects,
        image_side=args.image_side,
        patch_size=args.patch_size,
        seed=args.seed,
        subject_sd=args.subject_sd,
        workers=args.workers,
        filt=args.filter,
        level_range=args.levels,
        method=args.method,
    )
    io.write_records(args.out, records)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wavehurst", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("dwt", help="wavelet-transform a PGM or CSV image")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--filter", choices=FILTER_NAMES, default="haar")
    s.add_argument("--j0", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_dwt)

    s = sub.add_parser("synth", help="simulate fractional Brownian motion or field")
    s.add_argument("--dim", type=int, choices=(1, 2), default=2)
    s.add_argument("--hurst", type=float, required=True)
    s.add_argument("--size", type=int, default=512)
    s.add_argument("--sigma", type=float, default=1.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--method", choices=("circulant", "cholesky"), default="circulant")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("spectrum", help="wavelet spectrum from a dwt output directory")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--dir", choices=("h", "v", "d", "1d"), default="d")
    s.add_argument("--levels", type=_levels_arg, default=(3, 7))
    s.add_argument("--bias", choices=("none", "av", "digamma"), default="none")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("estimate", help="Hurst exponent from a spectrum CSV")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--method", choices=METHODS, default="tt")
    s.add_argument("--dim", type=int, choices=(1, 2), default=2)
    s.add_argument("--dir", choices=("h", "v", "d", "1d"))
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("simstudy", help="Monte-Carlo estimator comparison")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_simstudy)

    s = sub.add_parser("classify", help="cross-validated logistic classification")
    s.add_argument("--records", required=True)
    s.add_argument("--features", type=_list_arg, default=["hd"])
    s.add_argument("--folds", type=int, default=4)
    s.add_argument("--reps", type=int, default=30)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--threshold", choices=("per_fold", "global"), default="per_fold")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("anova", help="nested ANOVA of one feature")
    s.add_argument("--records", required=True)
    s.add_argument("--feature", choices=("hd", "hh", "hv"), default="hd")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_anova)

    def add_feature_opts(s):
        s.add_argument("--filter", choices=FILTER_NAMES, default="sym8")
        s.add_argument("--levels", type=_levels_arg, default=None)
        s.add_argument("--method", choices=METHODS, default="tt")

    s = sub.add_parser("features", help="per-patch features from a manifest of images")
    s.add_argument("--manifest", required=True, help="CSV with subject_id,status,path")
    s.add_argument("--layout", help="patch layout file")
    s.add_argument("--patch-size", type=int, default=1024)
    add_feature_opts(s)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_features)

    s = sub.add_parser("cohort", help="features for a synthetic two-class cohort")
    s.add_argument("--h-cancer", type=float, default=0.45)
    s.add_argument("--h-normal", type=float, default=0.65)
    s.add_argument("--subjects", type=int, default=50, help="per class")
    s.add_argument("--image-side", type=int, default=512)
    s.add_argument("--patch-size", type=int, default=256)
    s.add_argument("--subject-sd", type=float, default=0.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int, default=1)
    add_feature_opts(s)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_cohort)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        args.func(args)
    except NumericalError as exc:
        log.error("%s", exc)
        return EXIT_NUMERIC
    except (InputError, ValueError, KeyError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
