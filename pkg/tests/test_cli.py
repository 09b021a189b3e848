import json
import subprocess
import sys

import numpy as np
import pytest

from dichotomy import parse_scenario, run_command
from dichotomy.errors import ScenarioError
from dichotomy.scenario import Scenario, encode_complex

MINIMAL = {
    "generator": [[[-2.0, 0.0]]],
    "grid": {"m": 16, "n": 4096},
    "rhs": [[1.0, [[1.0, 0.0]]]],
}


def scenario(**overrides):
    doc = dict(MINIMAL)
    doc.update(overrides)
    return parse_scenario(doc)


class TestScenarioParsing:
    def test_minimal_fills_defaults(self):
        s = scenario()
        assert s.grid == {"m": 16, "n": 4096}
        assert s.solver["q_nodes"] == 256
        assert s.solver["oversample"] == 8
        assert s.solver["mode"] == "green"
        assert s.seed == 0
        assert s.nonlinearity is None

    def test_missing_generator_names_field(self):
        with pytest.raises(ScenarioError, match="generator"):
            parse_scenario({"rhs": []})

    def test_bad_solver_field_has_path(self):
        with pytest.raises(ScenarioError, match="solver"):
            parse_scenario(dict(MINIMAL, solver={"q_nodes": 2}))

    def test_round_trip_identity(self):
        s = scenario(seed=7, solver={"oversample": 16})
        again = parse_scenario(s.to_json())
        assert again == s
        assert again.to_json() == s.to_json()

    def test_generator_matrix_view(self):
        s = parse_scenario({"generator": [[[0.0, 1.0], [1.0, 0.0]],
                                          [[-1.0, 0.0], [0.0, -1.0]]]})
        expected = np.array([[1j, 1.0], [-1.0, -1j]])
        assert np.abs(s.generator_matrix() - expected).max() == 0.0

    def test_encode_complex_round_trip(self):
        from dichotomy.scenario import _complex_array
        arr = np.array([[1 + 2j, -0.5], [0.0, 3j]])
        assert np.abs(_complex_array(encode_complex(arr)) - arr).max() == 0.0

    def test_rejects_nonsquare_generator(self):
        with pytest.raises(ScenarioError, match="square"):
            parse_scenario({"generator": [[[1.0, 0.0], [2.0, 0.0]]]})


class TestRunCommand:
    def test_check_reports_certificates(self):
        s = parse_scenario({"generator": encode_complex(np.diag([-1.0, 1.0]))})
        result = run_command("check", s)
        r = result.report["results"]
        assert r["gap"] == pytest.approx(1.0, abs=1e-12)
        assert r["M"] == pytest.approx(1.0, abs=1e-6)
        assert r["growth_bound"] == pytest.approx(1.0, abs=1e-12)
        assert r["hyperbolic_margin"] == pytest.approx(abs(np.exp(-1) - 1), rel=1e-9)

    def test_solve_green_results(self):
        result = run_command("solve-green", scenario())
        r = result.report["results"]
        assert r["solution_sup_norm"] == pytest.approx(5 ** -0.5, rel=1e-9)
        assert r["mild_residual"]["max"] <= r["mild_residual"]["tolerance"]
        assert all(c["ok"] for c in result.report["certificates"])
        assert "solution" in result.trajectories

    def test_solve_band_certificates(self):
        result = run_command("solve-band", scenario())
        certs = {c["name"]: c for c in result.report["certificates"]}
        assert certs["as_norm_ratio"]["ok"]
        assert certs["fast_path_agreement"]["ok"]
        assert any(name.startswith("band_") for name in certs)

    def test_certify_bounds(self):
        s = parse_scenario({"generator": [[[-1.0, 0.0]]]})
        result = run_command("certify", s)
        r = result.report["results"]
        assert r["M"] == pytest.approx(1.0, abs=1e-6)
        assert r["band_kernel_l1_bound"] == pytest.approx(
            (2 / np.pi) * np.sqrt(10.0), abs=1e-5)
        assert r["inverse_norm_bound"] == pytest.approx(
            (18 / np.pi) * np.sqrt(10.0), abs=1e-4)
        assert all(c["ok"] for c in result.report["certificates"])

    def test_asnorm_and_spectrum(self):
        result = run_command("asnorm", scenario())
        assert result.report["results"]["as_norm"] == pytest.approx(5.0, abs=1e-9)
        assert result.report["results"]["as_tilde_norm"] == pytest.approx(1.0, abs=1e-6)
        spec = run_command("spectrum", scenario())
        assert spec.report["results"]["frequencies"] == [1.0]

    def test_nonlinear_command(self):
        s = scenario(
            rhs=[[1.0, [[0.125, 0.0]]], [-1.0, [[0.125, 0.0]]]],
            generator=[[[-1.0, 0.0]]],
            nonlinearity={"tensors": [encode_complex(np.zeros((1, 1))),
                                      encode_complex(0.01 * np.ones((1, 1, 1)))],
                          "beta": 1.0})
        result = run_command("nonlinear", s)
        r = result.report["results"]
        assert r["converged"]
        assert r["certificate_holds"] and r["seed_condition_holds"]
        assert r["final_residual_as"] <= 1e-8

    def test_nonlinear_requires_section(self):
        with pytest.raises(ScenarioError, match="nonlinearity"):
            run_command("nonlinear", scenario())


def run_cli(args, tmp_path, config):
    cfg = tmp_path / "scenario.json"
    cfg.write_text(json.dumps(config))
    return subprocess.run(
        [sys.executable, "-m", "dichotomy.cli", *args, "--config", str(cfg)],
        capture_output=True, text=True)


class TestCliProcess:
    def test_exit_zero_and_report_on_stdout(self, tmp_path):
        proc = run_cli(["check"], tmp_path, MINIMAL)
        assert proc.returncode == 0
        report = json.loads(proc.stdout)
        assert report["command"] == "check"
        assert report["schema_version"] == 1

    def test_non_hyperbolic_exit_code(self, tmp_path):
        config = dict(MINIMAL, generator=[[[0.0, 0.0]]])
        proc = run_cli(["solve-green"], tmp_path, config)
        assert proc.returncode == 2
        payload = json.loads(proc.stdout)
        assert payload["error"]["type"] == "NotHyperbolicError"

    def test_axis_spectrum_exit_code(self, tmp_path):
        rotation = [[[0.0, 0.0], [1.0, 0.0]], [[-1.0, 0.0], [0.0, 0.0]]]
        config = dict(MINIMAL, generator=rotation,
                      rhs=[[1.0, [[1.0, 0.0], [0.0, 0.0]]]])
        proc = run_cli(["solve-band"], tmp_path, config)
        assert proc.returncode == 2
        payload = json.loads(proc.stdout)
        assert payload["error"]["type"] == "SpectrumOnAxisError"

    def test_bad_config_exit_code(self, tmp_path):
        proc = run_cli(["check"], tmp_path, {"rhs": []})
        assert proc.returncode == 2

    def test_csv_and_figures_artifacts(self, tmp_path):
        out = tmp_path / "out"
        cfg = tmp_path / "scenario.json"
        cfg.write_text(json.dumps(MINIMAL))
        proc = subprocess.run(
            [sys.executable, "-m", "dichotomy.cli", "solve-green",
             "--config", str(cfg), "--out", str(out), "--csv", "--figures"],
            capture_output=True, text=True)
        assert proc.returncode == 0
        assert (out / "report.json").exists()
        csv_path = out / "solution.csv"
        assert csv_path.exists()
        header, first = csv_path.read_text().splitlines()[:2]
        assert header == "t,re_x1,im_x1"
        data = np.loadtxt(csv_path, delimiter=",", skiprows=1)
        mags = np.hypot(data[:, 1], data[:, 2])
        assert mags.max() == pytest.approx(5 ** -0.5, rel=1e-6)
        pngs = sorted(p.name for p in out.glob("*.png"))
        assert "solution.png" in pngs and "kernel.png" in pngs
        report = json.loads((out / "report.json").read_text())
        assert "solution.csv" in report["artifacts"]
        assert any(name.endswith(".png") for name in report["artifacts"])

    def test_determinism_modulo_timing(self, tmp_path):
        outputs = []
        for run in ("a", "b"):
            out = tmp_path / run
            cfg = tmp_path / f"scenario_{run}.json"
            cfg.write_text(json.dumps(dict(MINIMAL, seed=11)))
            proc = subprocess.run(
                [sys.executable, "-m", "dichotomy.cli", "solve-band",
                 "--config", str(cfg), "--out", str(out), "--seed", "11"],
                capture_output=True, text=True)
            assert proc.returncode == 0
            doc = json.loads((out / "report.json").read_text())
            doc.pop("timing")
            outputs.append(json.dumps(doc, sort_keys=True, indent=2))
        assert outputs[0] == outputs[1]


class TestReportSchema:
    def test_certificates_carry_computed_bound_ok(self):
        for command in ("solve-green", "solve-band", "asnorm"):
            result = run_command(command, scenario())
            assert result.report["certificates"]
            for cert in result.report["certificates"]:
                assert set(cert) == {"name", "computed", "bound", "ok"}

    def test_timing_isolated_in_own_section(self):
        result = run_command("check", scenario())
        assert "elapsed_s" in result.report["timing"]
        assert "timing" not in result.report["results"]

    def test_thread_cap_env_smoke(self, tmp_path):
        import os
        cfg = tmp_path / "s.json"
        cfg.write_text(json.dumps(MINIMAL))
        env = dict(os.environ, DICHOTOMY_THREADS="1")
        proc = subprocess.run(
            [sys.executable, "-m", "dichotomy.cli", "check",
             "--config", str(cfg)],
            capture_output=True, text=True, env=env)
        assert proc.returncode == 0
