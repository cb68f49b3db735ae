import csv
import io as stdio
import math

import numpy as np
import pytest

from wavehurst import io
from wavehurst.cli import main
from wavehurst.dwt import dwt2d
from wavehurst.errors import InputError
from wavehurst.harness.features import SampleRecord


def test_pgm_round_trip(tmp_path, rng):
    img = rng.integers(0, 65536, size=(12, 20)).astype(float)
    img[0, 0], img[-1, -1] = 0, 65535
    io.write_pgm(tmp_path / "a.pgm", img)
    np.testing.assert_array_equal(io.read_pgm(tmp_path / "a.pgm"), img)
    small = rng.integers(0, 256, size=(5, 7)).astype(float)
    small[0, 0], small[1, 1] = 0, 255
    io.write_pgm(tmp_path / "b.pgm", small, bits=8)
    np.testing.assert_array_equal(io.read_image(tmp_path / "b.pgm"), small)


def test_pgm_with_comment(tmp_path):
    (tmp_path / "c.pgm").write_bytes(b"P5\n# made by hand\n2 1\n255\n\x01\x02")
    np.testing.assert_array_equal(io.read_pgm(tmp_path / "c.pgm"), [[1.0, 2.0]])
    (tmp_path / "d.pgm").write_bytes(b"P2\n2 1\n255\n1 2\n")
    with pytest.raises(InputError):
        io.read_pgm(tmp_path / "d.pgm")


def test_matrix_round_trip_is_exact(tmp_path, rng):
    a = rng.standard_normal((4, 6)) * 1e-7
    io.write_matrix(tmp_path / "m.csv", a)
    np.testing.assert_array_equal(io.read_matrix(tmp_path / "m.csv"), a)


def test_records_round_trip(tmp_path):
    recs = [SampleRecord("c1", "cancer", k, 0.1 * k, 1 / 3, math.pi / 10) for k in range(1, 6)]
    io.write_records(tmp_path / "r.csv", recs)
    assert io.read_records(tmp_path / "r.csv") == recs
    with open(tmp_path / "r.csv") as fh:
        assert next(csv.reader(fh)) == list(io.RECORD_COLUMNS)


def test_write_rows_to_stream():
    buf = stdio.StringIO()
    io.write_rows(buf, ("a", "b"), [(1, 0.1)])
    assert buf.getvalue() == "a,b\n1,0.1\n"


# --- CLI ----------------------------------------------------------------------


def run(*argv):
    return main([str(a) for a in argv])


def test_cli_pipeline(tmp_path, capsys):
    assert run("synth", "--hurst", 0.5, "--size", 256, "--seed", 2, "--out", tmp_path / "f.csv") == 0
    assert run("dwt", "--in", tmp_path / "f.csv", "--filter", "daub6", "--out", tmp_path / "dec") == 0
    assert (tmp_path / "dec" / "d_d_7.csv").exists() and (tmp_path / "dec" / "a_0.csv").exists()
    assert run("spectrum", "--in", tmp_path / "dec", "--levels", "2:6", "--out", tmp_path / "s.csv") == 0
    capsys.readouterr()
    assert run("estimate", "--in", tmp_path / "s.csv", "--method", "tt", "--dim", 2) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "method,direction,slope,H,flags"
    method, direction, slope, h, flags = lines[1].split(",")
    assert method == "tt" and direction == "d" and 0.2 < float(h) < 0.8

    # the subband files agree with the library transform
    field = io.read_matrix(tmp_path / "f.csv")
    np.testing.assert_array_equal(io.read_matrix(tmp_path / "dec" / "d_h_3.csv"), dwt2d(field, "daub6").detail(3, "h"))


def test_cli_one_dimensional(tmp_path, capsys):
    assert run("synth", "--dim", 1, "--hurst", 0.7, "--size", 512, "--out", tmp_path / "x.csv") == 0
    assert run("dwt", "--in", tmp_path / "x.csv", "--filter", "haar", "--out", tmp_path / "dec") == 0
    assert run("spectrum", "--in", tmp_path / "dec", "--dir", "1d", "--out", tmp_path / "s.csv") == 0
    capsys.readouterr()
    assert run("estimate", "--in", tmp_path / "s.csv", "--method", "ols", "--dim", 1) == 0
    assert capsys.readouterr().out.splitlines()[1].startswith("ols,1d,")


def test_cli_exit_codes(tmp_path):
    assert run("synth", "--hurst", 1.5, "--size", 64, "--out", tmp_path / "f.csv") == 2
    assert run("synth", "--hurst", 0.5, "--size", 100, "--out", tmp_path / "f.csv") == 2
    assert run("dwt", "--in", tmp_path / "missing.csv", "--out", tmp_path / "o") == 2
    np.savetxt(tmp_path / "const.csv", np.ones((64, 64)), delimiter=",")
    assert run("dwt", "--in", tmp_path / "const.csv", "--out", tmp_path / "dec") == 0
    # zero energy at every level -> numerical failure
    assert run("spectrum", "--in", tmp_path / "dec", "--levels", "1:4", "--out", tmp_path / "s.csv") == 3
    (tmp_path / "bad.cfg").write_text("replicates = 0\n")
    assert run("simstudy", "--config", tmp_path / "bad.cfg", "--out", tmp_path / "r.csv") == 2


def _digest(path):
    return path.read_bytes()


def test_cli_determinism(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("dim = 2\nsize = 32\nlevels = 1:3\nfilters = haar, daub6\nreplicates = 3\ncontamination_level = 1\nseed = 5\n")
    outs = []
    for k, workers in enumerate((1, 1, 3)):
        d = tmp_path / f"run{k}"
        d.mkdir()
        assert run("synth", "--hurst", 0.4, "--size", 64, "--seed", 9, "--out", d / "f.csv") == 0
        assert run("dwt", "--in", d / "f.csv", "--filter", "sym8", "--out", d / "dec") == 0
        assert run("spectrum", "--in", d / "dec", "--levels", "1:4", "--bias", "digamma", "--out", d / "s.csv") == 0
        assert run("simstudy", "--config", cfg, "--workers", workers, "--out", d / "sim.csv") == 0
        assert run("cohort", "--subjects", 4, "--image-side", 128, "--patch-size", 64, "--levels", "1:4",
                   "--filter", "haar", "--workers", workers, "--out", d / "rec.csv") == 0
        assert run("classify", "--records", d / "rec.csv", "--reps", 3, "--folds", 2, "--workers", workers,
                   "--out", d / "m.csv") == 0
        assert run("anova", "--records", d / "rec.csv", "--out", d / "a.csv") == 0
        outs.append({p.name: _digest(p) for p in sorted(d.rglob("*.csv"))})
    assert outs[0] == outs[1] == outs[2]
    assert len(outs[0]) > 10


def test_cli_features_from_manifest(tmp_path):
    rng = np.random.default_rng(0)
    lines = ["subject_id,status,path"]
    for i, status in enumerate(["cancer", "cancer", "normal", "normal"]):
        io.write_pgm(tmp_path / f"img{i}.pgm", rng.standard_normal((160, 160)))
        lines.append(f"s{i},{status},img{i}.pgm")
    (tmp_path / "manifest.csv").write_text("\n".join(lines) + "\n")
    assert run("features", "--manifest", tmp_path / "manifest.csv", "--patch-size", 128, "--levels", "1:5",
               "--out", tmp_path / "rec.csv") == 0
    recs = io.read_records(tmp_path / "rec.csv")
    assert len(recs) == 20
    assert run("anova", "--records", tmp_path / "rec.csv", "--feature", "hv", "--out", tmp_path / "a.csv") == 0
