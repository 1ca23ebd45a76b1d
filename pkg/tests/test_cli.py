import csv
import json
import subprocess
import sys

import pytest

from nnhankel import io
from nnhankel.cli import EXIT_EIGENPAIR, EXIT_OK, EXIT_PARSE, EXIT_VERIFY, main, parse_sizes


@pytest.fixture
def fixture_file(tmp_path):
    def make(name):
        g, pair = io.load_fixture(name)
        path = tmp_path / f"{name}.json"
        io.write_instance(path, g, pair)
        return path
    return make


def run(*argv):
    return main([str(a) for a in argv])


class TestSolve:
    def test_example1(self, fixture_file, tmp_path, capsys):
        out = tmp_path / "res.json"
        assert run("solve", fixture_file("example1"), "-o", out) == EXIT_OK
        assert "stage:          A" in capsys.readouterr().out
        res = io.read_result(out)
        assert res.stage == "A"
        assert res.frob_norm == pytest.approx(11.61, abs=0.01)

    def test_example2(self, fixture_file, tmp_path, capsys):
        out = tmp_path / "res.json"
        assert run("solve", fixture_file("example2"), "--output", out) == EXIT_OK
        assert io.read_result(out).stage == "B"
        assert "stage:          B" in capsys.readouterr().out

    def test_no_tiebreak(self, fixture_file, tmp_path):
        out = tmp_path / "res.json"
        assert run("solve", fixture_file("example2"), "--no-tiebreak", "-o", out) == EXIT_OK
        assert io.read_result(out).stage == "B"

    def test_zero_eigenvector(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({
            "n": 2,
            "hankel_generator": [1.0, 2.0, 3.0],
            "lambda": {"re": 1.0, "im": 0.0},
            "x": [{"re": 0.0, "im": 0.0}] * 2,
        }))
        assert run("solve", path) == EXIT_EIGENPAIR
        assert "error" in capsys.readouterr().err

    def test_mismatched_lengths(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({
            "n": 3,
            "hankel_generator": [1.0, 2.0, 3.0],
            "lambda": {"re": 1.0, "im": 0.0},
            "x": [{"re": 1.0, "im": 0.0}] * 3,
        }))
        assert run("solve", path) == EXIT_PARSE

    def test_missing_file(self, tmp_path):
        assert run("solve", tmp_path / "absent.json") == EXIT_PARSE

    def test_bad_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert run("solve", path) == EXIT_PARSE


class TestCheck:
    def test_corrupted_norm(self, fixture_file, tmp_path, capsys):
        inst = fixture_file("example1")
        out = tmp_path / "res.json"
        run("solve", inst, "-o", out)
        assert run("check", inst, out) == EXIT_OK
        d = json.loads(out.read_text())
        d["frob_norm"] *= 1.5
        out.write_text(json.dumps(d))
        capsys.readouterr()
        assert run("check", inst, out) == EXIT_VERIFY
        assert "frob_norm" in capsys.readouterr().out

    def test_wrong_size(self, fixture_file, tmp_path):
        out = tmp_path / "res.json"
        run("solve", fixture_file("intro3x3"), "-o", out)
        assert run("check", fixture_file("example1"), out) == EXIT_PARSE


class TestGen:
    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for path in (a, b):
            assert run("gen", "--n", 12, "--seed", 42, "--mode", "arbitrary", "-o", path) == EXIT_OK
        assert a.read_bytes() == b.read_bytes()

    @pytest.mark.parametrize("argv", [["--n", "0"], ["--n", "-3"], ["--n", "4", "--seed", "-1"],
                                      ["--n", "4", "--mode", "other"]])
    def test_bad_flags(self, tmp_path, argv):
        with pytest.raises(SystemExit) as exc:
            run("gen", *argv, "-o", tmp_path / "x.json")
        assert exc.value.code == EXIT_PARSE

    @pytest.mark.parametrize("mode", ["planted", "arbitrary"])
    def test_round_trip(self, tmp_path, mode, capsys):
        for seed in range(20):
            inst, res = tmp_path / f"i{seed}.json", tmp_path / f"r{seed}.json"
            assert run("gen", "--n", 2 + seed % 9, "--seed", seed, "--mode", mode, "-o", inst) == EXIT_OK
            assert run("solve", inst, "-o", res) == EXIT_OK
            assert run("check", inst, res) == EXIT_OK
            if mode == "planted":
                assert io.read_result(res).stage == "A"
        capsys.readouterr()


class TestBench:
    def test_rows(self, tmp_path, capsys):
        out = tmp_path / "b.csv"
        assert run("bench", "--sizes", "10:50:10", "--trials", 10, "--csv", out) == EXIT_OK
        with open(out, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 50
        assert {int(r["n"]) for r in rows} == {10, 20, 30, 40, 50}
        assert "cluster small" in capsys.readouterr().out

    def test_all_planted(self, tmp_path, capsys):
        out = tmp_path / "b.csv"
        assert run("bench", "--sizes", "3:6:3", "--trials", 4, "--planted-fraction", 1, "--csv", out) == EXIT_OK
        with open(out, newline="", encoding="utf-8") as fh:
            assert {r["stage"] for r in csv.DictReader(fh)} == {"A"}
        capsys.readouterr()

    @pytest.mark.parametrize("sizes", ["50:10:10", "0:10:5", "a:b:c", "10:20"])
    def test_bad_sizes(self, tmp_path, sizes):
        with pytest.raises(SystemExit) as exc:
            run("bench", "--sizes", sizes, "--csv", tmp_path / "b.csv")
        assert exc.value.code == EXIT_PARSE

    def test_bad_fraction(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run("bench", "--planted-fraction", 2, "--csv", tmp_path / "b.csv")
        assert exc.value.code == EXIT_PARSE


def test_parse_sizes_inclusive():
    assert parse_sizes("10:300:10") == tuple(range(10, 301, 10))
    assert parse_sizes("5:5:1") == (5,)


def test_module_entry_point(tmp_path):
    inst = tmp_path / "i.json"
    proc = subprocess.run([sys.executable, "-m", "nnhankel", "gen", "--n", "3", "-o", str(inst)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    proc = subprocess.run([sys.executable, "-m", "nnhankel", "solve", str(inst)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "stage:" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "nnhankel"], capture_output=True, text=True)
    assert proc.returncode == 2
