import json
import subprocess
import sys

import numpy as np
import pytest

from sparsecert.cli import build_parser, jsonable, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def matrix(tmp_path, capsys):
    path = tmp_path / "A.json"
    assert main(["gen", "--ensemble", "fourier", "--N", "16", "--m", "8", "--seed", "7", "--out", str(path)]) == 0
    capsys.readouterr()
    return path


class TestPipeline:
    def test_gen_then_rip(self, matrix, capsys):
        code, out, _ = run(capsys, "rip", "--matrix", str(matrix), "--s", "2")
        rep = json.loads(out)
        assert code == 0
        assert rep["s"] == 2 and 0 <= rep["delta"] and len(rep["extremal_support"]) == 2
        # pinned by the first validated run
        assert rep["delta"] == pytest.approx(0.48134620994057875, abs=1e-12)

    def test_byte_identical_reruns(self, matrix, capsys):
        a = run(capsys, "rip", "--matrix", str(matrix), "--s", "2")[1]
        b = run(capsys, "rip", "--matrix", str(matrix), "--s", "2")[1]
        assert a == b

    def test_solve_zero(self, matrix, tmp_path, capsys):
        y = tmp_path / "y.json"
        y.write_text(json.dumps([[0.0, 0.0]] * 8))
        code, out, _ = run(capsys, "solve", "--matrix", str(matrix), "--y", str(y))
        res = json.loads(out)
        assert code == 0 and res["objective"] == 0 and not any(res["x"])

    def test_recover_and_nsp(self, tmp_path, capsys):
        A = tmp_path / "H.json"
        main(["gen", "--ensemble", "hadamard", "--N", "8", "--m", "8", "--seed", "1", "--distinct-rows",
              "--out", str(A)])
        x0 = tmp_path / "x0.json"
        x0.write_text(json.dumps({"x": [0, 0, 1, 0, 0, 0, -1, 0]}))
        assert json.loads(run(capsys, "recover", "--matrix", str(A), "--x0", str(x0))[1])["success"]
        assert json.loads(run(capsys, "nsp", "--matrix", str(A), "--s", "3")[1])["verdict"] == "holds"

    def test_entropy(self, tmp_path, capsys):
        v = tmp_path / "v.json"
        v.write_text("[3, 4]")
        assert json.loads(run(capsys, "entropy", "--vector", str(v))[1])["entropy"] == pytest.approx(1.96)


class TestBounds:
    def test_table(self, capsys):
        out = json.loads(run(capsys, "bounds", "table")[1])
        assert out["rows"][0] == ["0", 40943, "inf", 36613, "inf"]
        assert out["rows"][2] == ["1/2", 163769, 13368, 146452, 11955]
        assert out["asymptotic"]["2/3"] == [15985, 1305]

    def test_table_csv_and_pretty(self, capsys):
        csv_out = run(capsys, "bounds", "table", "--format", "csv")[1]
        assert csv_out.splitlines()[-1] == "1,inf,3342,inf,2989"
        pretty = run(capsys, "bounds", "table", "--pretty")[1]
        assert "264453" in pretty and "{" not in pretty

    def test_sample_size(self, capsys):
        out = json.loads(run(capsys, "bounds", "sample-size", "--N", "1024", "--s", "10", "--crosscheck")[1])
        assert out["m"] == 2153807455

    def test_certificate(self, capsys):
        out = json.loads(run(capsys, "bounds", "certificate", "--N", "1024", "--s", "10")[1])
        assert out["inequality_ok"] is True

    def test_figure1(self, tmp_path, capsys):
        svg = tmp_path / "f.svg"
        out = json.loads(run(capsys, "bounds", "figure1", "--figure", str(svg))[1])
        assert len(out["series"]) == 200 and svg.exists()

    def test_thresholds_single(self, capsys):
        out = json.loads(run(capsys, "bounds", "thresholds", "--s", "10")[1])
        assert out["best"] == pytest.approx(2 / 3)


class TestChecks:
    def test_khintchine(self, capsys):
        out = json.loads(run(capsys, "check", "khintchine", "--p", "6", "--N", "10")[1])
        assert out["ok"] and out["outcomes"] == 1024

    def test_symmetrization(self, tmp_path, capsys):
        d = tmp_path / "d.json"
        d.write_text(json.dumps({"laws": [[[0.5, [1.0]], [0.5, [-1.0]]]] * 3}))
        out = json.loads(run(capsys, "check", "symmetrization", "--dist", str(d))[1])
        assert out["outcomes"] == 64 and out["ok"]

    def test_covering(self, capsys):
        out = json.loads(run(capsys, "check", "covering", "--N", "1", "--M", "2", "3", "--samples", "500")[1])
        assert out["violations"] == 0 and len(out["checks"]) == 2

    def test_lemmas(self, matrix, capsys):
        out = json.loads(run(capsys, "check", "lemmas", "--matrix", str(matrix), "--s", "1", "--trials", "500")[1])
        assert out["tlem"]["violations"] == out["cwx2"]["violations"] == out["l21"]["violations"] == 0


class TestExperiment:
    def test_phase_transition_files(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"N": 16, "s_values": [1], "m_values": [2, 6], "trials": 5, "seed": 9}))
        csv_path = tmp_path / "pt.csv"
        code, out, _ = run(capsys, "experiment", "phase-transition", "--config", str(cfg), "--csv", str(csv_path),
                           "--figure", str(tmp_path / "pt.svg"), "--threads", "2")
        assert code == 0
        assert csv_path.read_text().splitlines()[0] == "N,s,m,ensemble,seed,trials,successes,prob,secs"
        assert len(json.loads(out)["records"]) == 2

    def test_flags_override_config(self, capsys):
        out = run(capsys, "experiment", "phase-transition", "--N", "8", "--s", "0", "--m-range", "1", "3", "1",
                  "--trials", "2", "--format", "csv")[1]
        lines = out.splitlines()
        assert len(lines) == 4 and all(line.split(",")[7] == "1" for line in lines[1:])


class TestExitCodes:
    def test_usage_errors_exit_two(self, capsys):
        with pytest.raises(SystemExit) as err:
            main(["rip", "--matrix", "missing.json", "--s", "2"])
        assert err.value.code == 2
        assert "--matrix" in capsys.readouterr().err
        with pytest.raises(SystemExit) as err:
            main(["bounds", "table", "--bogus"])
        assert err.value.code == 2

    def test_domain_error_exits_one(self, matrix, capsys):
        code, _, err = run(capsys, "rip", "--matrix", str(matrix), "--s", "40")
        assert code == 1 and json.loads(err)["error"] == "InvalidParameter"

    def test_hypothesis_violation_exits_one(self, capsys):
        code, _, err = run(capsys, "bounds", "sample-size", "--N", "100", "--s", "2")
        assert code == 1 and "HypothesisViolation" in err

    def test_csv_on_non_tabular_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as err:
            main(["bounds", "table", "--format", "xml"])
        assert err.value.code == 2

    def test_help_lists_flags(self):
        parser = build_parser()
        text = parser._subparsers._group_actions[0].choices["rip"].format_help()
        for flag in ("--matrix", "--s", "--budget", "--out", "--pretty"):
            assert flag in text

    def test_module_entry_point(self):
        res = subprocess.run([sys.executable, "-m", "sparsecert", "bounds", "thresholds", "--s", "5"],
                             capture_output=True, text=True)
        assert res.returncode == 0 and json.loads(res.stdout)["best"] == pytest.approx(2 / 3)


class TestJsonable:
    def test_special_values(self):
        assert jsonable({"a": float("inf"), "b": float("nan"), "c": np.int64(3), "d": (1, 2)}) == \
            {"a": "inf", "b": None, "c": 3, "d": [1, 2]}
