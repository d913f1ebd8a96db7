import json

import numpy as np
import pytest

import rsvdkit.factor
from rsvdkit import SyntheticSpec, load_matrix_market
from rsvdkit.cli import main


@pytest.fixture()
def synth_spec_file(tmp_path):
    spec = SyntheticSpec(
        n=20, d=14, spectrum=np.linspace(2.0, 0.6, 10), seed=3
    ).to_dict()
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec))
    return str(path)


class TestRunCommand:
    def test_run_synth_input(self, tmp_path, synth_spec_file, capsys):
        out = tmp_path / "row.csv"
        code = main(
            [
                "run",
                "--input", f"synth:{synth_spec_file}",
                "--algo", "bk",
                "--k", "3",
                "--q", "3",
                "--seed", "7",
                "--out", str(out),
            ]
        )
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "algo,k,p,q,seed,frob_ratio,spectral_ratio,per_vector_max,wall_ms"
        assert len(lines) == 2
        assert lines[1].startswith("bk,3,3,3,7,")
        assert "frob_ratio" in capsys.readouterr().out

    def test_run_eps_mode(self, tmp_path, synth_spec_file):
        out = tmp_path / "row.csv"
        code = main(
            [
                "run",
                "--input", f"synth:{synth_spec_file}",
                "--algo", "si",
                "--k", "2",
                "--eps", "0.5",
                "--C", "4",
                "--seed", "1",
                "--out", str(out),
            ]
        )
        assert code == 0
        # q = ceil(4 ln(14) / 0.5) = 22
        assert out.read_text().splitlines()[1].split(",")[3] == "22"

    def test_q_and_eps_together_is_usage_error(self, tmp_path, synth_spec_file):
        code = main(
            [
                "run",
                "--input", f"synth:{synth_spec_file}",
                "--algo", "si",
                "--k", "2",
                "--q", "2",
                "--eps", "0.5",
                "--seed", "1",
                "--out", str(tmp_path / "x.csv"),
            ]
        )
        assert code == 2

    def test_missing_input_is_io_error(self, tmp_path):
        code = main(
            [
                "run",
                "--input", str(tmp_path / "nope.csv"),
                "--algo", "si",
                "--k", "2",
                "--q", "1",
                "--seed", "1",
                "--out", str(tmp_path / "x.csv"),
            ]
        )
        assert code == 3


class TestSweepCommand:
    def test_sweep_with_summary(self, tmp_path, synth_spec_file):
        cfg = {
            "algorithms": ["si", "sketch"],
            "k": 3,
            "q_list": [1, 2],
            "seeds": [1, 2],
            "synthetic": json.loads(open(synth_spec_file).read()),
        }
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        out = tmp_path / "sweep.csv"
        summary = tmp_path / "summary.json"
        code = main(
            ["sweep", "--config", str(cfg_path), "--out", str(out), "--summary", str(summary)]
        )
        assert code == 0
        assert len(out.read_text().splitlines()) == 1 + 2 * 2 * 2
        payload = json.loads(summary.read_text())
        assert payload["config"]["k"] == 3
        assert "medians" in payload

    def test_flag_overrides_config(self, tmp_path, synth_spec_file):
        cfg = {
            "algorithms": ["sketch"],
            "k": 3,
            "q_list": [0],
            "seeds": [1],
            "synthetic": json.loads(open(synth_spec_file).read()),
        }
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        out = tmp_path / "sweep.csv"
        code = main(["sweep", "--config", str(cfg_path), "--out", str(out), "--k", "5"])
        assert code == 0
        assert out.read_text().splitlines()[1].split(",")[1] == "5"


class TestSynthCommand:
    def test_matrix_market_roundtrip(self, tmp_path, synth_spec_file):
        out = tmp_path / "a.mtx"
        assert main(["synth", "--spec", synth_spec_file, "--out", str(out)]) == 0
        op = load_matrix_market(str(out))
        assert op.shape == (20, 14)

    def test_csv_output(self, tmp_path, synth_spec_file):
        out = tmp_path / "a.csv"
        assert main(["synth", "--spec", synth_spec_file, "--out", str(out)]) == 0
        assert len(out.read_text().splitlines()) == 20

    def test_unknown_extension_usage_error(self, tmp_path, synth_spec_file):
        assert main(["synth", "--spec", synth_spec_file, "--out", str(tmp_path / "a.xyz")]) == 2


class TestChebCommand:
    def test_table_contents(self, tmp_path):
        out = tmp_path / "cheb.csv"
        code = main(
            ["cheb", "--alpha", "1.0", "--gamma", "0.25", "--q", "5", "--grid", "200",
             "--out", str(out)]
        )
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "x,poly,power"
        rows = [tuple(map(float, line.split(","))) for line in lines[1:]]
        by_x = {r[0]: r for r in rows}
        edge = 1.25
        assert edge in by_x
        assert abs(by_x[edge][1] - edge) < 1e-10  # polynomial fixed point
        # power column at x = alpha: edge * (alpha/edge)^(2q+1) = alpha * (1+gamma)^(-2q)
        assert 1.0 in by_x
        assert abs(by_x[1.0][2] - 1.25 ** (-10)) < 1e-12
        # monotone on the upper segment
        upper = [r for r in rows if r[0] >= edge]
        vals = [r[1] for r in upper]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_gamma_out_of_range_usage_error(self, tmp_path):
        code = main(
            ["cheb", "--alpha", "1.0", "--gamma", "1.5", "--q", "5", "--grid", "200",
             "--out", str(tmp_path / "c.csv")]
        )
        assert code == 2


class TestVerifyCommand:
    def test_fresh_checkout_passes(self, tmp_path, capsys):
        report_path = tmp_path / "report.json"
        code = main(["verify", "--json", str(report_path)])
        out = capsys.readouterr().out
        assert code == 0
        report = json.loads(report_path.read_text())
        assert report["passed"]
        modules = {c["module"] for c in report["checks"]}
        assert {"matrix", "factor", "chebyshev", "rsvd", "metrics", "bench"} <= modules
        assert "checks passed" in out

    def test_corrupted_eig_tolerance_fails_named_check(self, monkeypatch, capsys):
        monkeypatch.setattr(rsvdkit.factor, "DEFAULT_JACOBI_TOL", 1e-2)
        code = main(["verify"])
        out = capsys.readouterr().out
        assert code == 1
        assert "[FAIL] factor/eig_reconstruction" in out
