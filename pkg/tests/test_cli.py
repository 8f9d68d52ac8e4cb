import csv
import json
import shutil
import subprocess

import pytest

from phicov.cli import main, table1_rows
from phicov.instance import Cardinality, CoverageInstance, save


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_ratio_threshold(capsys):
    code, out, _ = run(capsys, "ratio", "--phi", "threshold:l=1", "--eps", "1e-8")
    assert code == 0
    assert out.splitlines()[0] == "alpha 0.6321206"
    assert "argmin_x 1" in out


def test_ratio_curve_and_m(capsys, tmp_path):
    curve = tmp_path / "curve.csv"
    code, out, _ = run(capsys, "ratio", "--phi", "threshold:l=3", "--m", "5", "--curve-out", str(curve))
    assert code == 0
    assert "curvature_m 5" in out and "certified_bound_m" in out
    rows = list(csv.reader(curve.open()))
    assert rows[0] == ["x", "alpha_x"] and [r[0] for r in rows[1:]] == ["1", "2", "3"]


def test_bench_table1(capsys, tmp_path):
    code, out, _ = run(capsys, "bench", "table1")
    assert code == 0
    rows = list(csv.DictReader(out.splitlines()))
    assert len(rows) == 8
    assert all(r["status"] == "pass" for r in rows)
    for r in rows:
        diff = abs(float(r["alpha"]) - float(r["reference"]))
        assert r["abs_diff"] == f"{diff:.10f}"
    out_path = tmp_path / "t1.csv"
    assert main(["--out", str(out_path), "bench", "table1"]) == 0
    assert out_path.read_text() == out


def test_bench_fails_on_loose_eps():
    # a huge eps makes the scan too coarse for the 1e-7 rows
    rows, ok = table1_rows(eps=0.5)
    assert not ok
    assert any(r[-1] == "FAIL" for r in rows)
    assert main(["--out", "/dev/null", "bench", "table1", "--eps", "0.5"]) == 1


def test_gen_is_byte_stable(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert main(["--out", str(p), "gen", "--random", "n=10,m=8,density=0.4,seed=7"]) == 0
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert doc["n"] == 10 and len(doc["sets"]) == 8 and doc["seed"] == 7
    c = tmp_path / "c.json"
    main(["--seed", "7", "--out", str(c), "gen", "--random", "n=10,m=8,density=0.4"])
    assert c.read_bytes() == a.read_bytes()


@pytest.mark.parametrize("method", ["lp-pipage", "greedy", "exact"])
def test_solve_methods(capsys, tmp_path, method):
    path = tmp_path / "inst.json"
    inst = CoverageInstance(4, [1.0, 2.0, 1.0, 1.0], [[0, 1], [1, 2], [3], [0, 3]])
    save(path, inst, Cardinality(2), "pav")
    code, out, _ = run(capsys, "solve", "--instance", str(path), "--method", method)
    assert code == 0
    doc = json.loads(out)
    assert doc["method"] == method
    assert len(doc["selected"]) == 2
    assert doc["value"] == pytest.approx(5.0)


def test_solve_trace_and_dump(capsys, tmp_path):
    path = tmp_path / "inst.json"
    main(["--out", str(path), "gen", "--random", "n=8,m=6,density=0.5,seed=3,k=2"])
    trace, lp = tmp_path / "trace.csv", tmp_path / "lp.txt"
    code, out, _ = run(
        capsys, "solve", "--instance", str(path), "--phi", "threshold:l=2",
        "--trace", str(trace), "--lp-dump", str(lp),
    )
    assert code == 0
    rows = list(csv.DictReader(trace.open()))
    Fs = [float(r["F"]) for r in rows]
    assert rows[0]["step"] == "0" and all(b >= a - 1e-9 for a, b in zip(Fs, Fs[1:]))
    assert lp.read_text().startswith("vars 14\n")


def test_usage_errors(capsys, tmp_path):
    assert run(capsys, "ratio", "--phi", "nope")[0] == 2
    assert run(capsys, "gen", "--random", "n=3")[0] == 2
    assert run(capsys, "gen", "--random", "n=3,m=2,k=5")[0] == 2
    assert run(capsys, "gen", "--random", "n=3,m=2,bogus=1")[0] == 2
    assert run(capsys, "solve", "--instance", str(tmp_path / "missing.json"))[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 1}')
    code, _, err = run(capsys, "solve", "--instance", str(bad))
    assert code == 2 and "$.weights" in err
    good = tmp_path / "good.json"
    main(["--out", str(good), "gen", "--random", "n=3,m=2,seed=1"])
    assert run(capsys, "solve", "--instance", str(good), "--method", "greedy", "--trace", "t.csv")[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["--threads", "0", "bench", "table1"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


@pytest.mark.skipif(shutil.which("phicov") is None, reason="console script not installed")
def test_console_script():
    out = subprocess.run(["phicov", "ratio", "--phi", "pav"], capture_output=True, text=True, check=True)
    assert out.stdout.startswith("alpha 0.79659")
