"""Front-end contract: exit codes, diagnostics, file formats, determinism.

Most cases drive cli.main() in-process so exit codes and stderr are cheap to
assert; one subprocess case checks the installed entry point. Determinism is
byte-level on the data files. The manifest is allowed to differ (wall time)
and is therefore never byte-compared.
"""

import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from openaqs import cli


def write(path: Path, text: str) -> Path:
    path.write_text(text, encoding="utf-8")
    return path


def run_cli(*argv) -> int:
    return cli.main(list(argv))


def read_csv(path: Path):
    lines = path.read_text(encoding="utf-8").splitlines()
    header = lines[0].split(",")
    return header, [dict(zip(header, line.split(","))) for line in lines[1:]]


MODEL_TOML = """
[model]
n_grid = [8, 16, 32, 64]
s_points = 11
"""


class TestExitCodes:
    def test_negative_eta_is_line_anchored_config_error(self, tmp_path, capsys):
        cfg = write(
            tmp_path / "bad.toml",
            "[bath]\nalpha = 0.1\neta = -0.5\n",
        )
        code = run_cli("rates", "--config", str(cfg), "--output", str(tmp_path / "o.csv"))
        err = capsys.readouterr().err
        assert code == cli.EXIT_CONFIG
        assert f"{cfg}:3: error: bath.eta: η must be positive" in err

    def test_empty_size_grid_is_config_error(self, tmp_path, capsys):
        cfg = write(tmp_path / "g.toml", "[rates]\nn_grid = []\n")
        code = run_cli("rates", "--config", str(cfg), "--output", str(tmp_path / "o.csv"))
        err = capsys.readouterr().err
        assert code == cli.EXIT_CONFIG
        assert "grid must not be empty" in err

    def test_unknown_key_is_config_error(self, tmp_path, capsys):
        cfg = write(tmp_path / "k.toml", "[rates]\nwindow = 3\n")
        code = run_cli("rates", "--config", str(cfg), "--output", str(tmp_path / "o.csv"))
        assert code == cli.EXIT_CONFIG
        assert "unknown key" in capsys.readouterr().err

    def test_toml_syntax_error_reports_location(self, tmp_path, capsys):
        cfg = write(tmp_path / "s.toml", "[bath]\nalpha = = 1\n")
        code = run_cli("rates", "--config", str(cfg), "--output", str(tmp_path / "o.csv"))
        err = capsys.readouterr().err
        assert code == cli.EXIT_CONFIG
        assert "line 2" in err

    def test_missing_output_path_is_config_error(self, tmp_path, capsys):
        cfg = write(tmp_path / "m.toml", MODEL_TOML)
        code = run_cli("model", "--config", str(cfg))
        assert code == cli.EXIT_CONFIG
        assert "output path required" in capsys.readouterr().err

    def test_missing_config_file_is_config_error(self, tmp_path, capsys):
        code = run_cli(
            "model",
            "--config",
            str(tmp_path / "nope.toml"),
            "--output",
            str(tmp_path / "o.csv"),
        )
        assert code == cli.EXIT_CONFIG

    def test_instability_is_numerical_failure(self, tmp_path, capsys):
        np.savetxt(tmp_path / "m.txt", 0.5 * np.array([[1.0, 1.6], [1.6, 1.0]]))
        cfg = write(tmp_path / "b.toml", '[bogoliubov]\nmatrix = "m.txt"\n')
        code = run_cli("bogoliubov", "--config", str(cfg))
        err = capsys.readouterr().err
        assert code == cli.EXIT_NUMERICAL
        assert "numerical failure at grid point 0" in err
        assert "m.txt" in err

    def test_strong_coupling_warning_carries_ratios(self, tmp_path, capsys):
        cfg = write(
            tmp_path / "w.toml",
            "[bath]\nalpha = 4.0\neta = 1.0\nomega_c = 10.0\ntemperature = 0.5\n",
        )
        code = run_cli("renorm", "--config", str(cfg), "--output", str(tmp_path / "o.csv"))
        err = capsys.readouterr().err
        assert code == cli.EXIT_OK
        assert "warning" in err
        assert "weak-coupling window" in err
        assert "max J/E0" in err


class TestValidateDirect:
    def test_small_p_rejected(self, tmp_path):
        cfg = cli.RunConfig(
            subcommand="renorm",
            parameters={"renorm": {"p": 1.5}},
            output="o.csv",
            fmt="csv",
            workers=1,
        )
        msgs = [d.message for d in cli.validate(cfg) if d.severity == "error"]
        assert any("p must be at least 2" in m for m in msgs)

    def test_fit_needs_two_decades(self):
        cfg = cli.RunConfig(
            subcommand="rates",
            parameters={"rates": {"n_grid": [64, 128, 192, 256]}},
            output="o.csv",
            fmt="csv",
            workers=1,
        )
        msgs = [d.message for d in cli.validate(cfg) if d.severity == "error"]
        assert any("two decades" in m for m in msgs)

    def test_runtime_scaling_target_in_unit_interval(self):
        cfg = cli.RunConfig(
            subcommand="dynamics",
            parameters={"dynamics": {"runtime_scaling": True, "target_success": 1.2}},
            output="o.csv",
            fmt="csv",
            workers=1,
        )
        msgs = [d.message for d in cli.validate(cfg) if d.severity == "error"]
        assert any("(0, 1)" in m for m in msgs)

    def test_clean_config_has_no_errors(self, tmp_path):
        cfg = cli.RunConfig(
            subcommand="model",
            parameters={"model": {"n_grid": [8, 16], "s_points": 5}},
            output="o.csv",
            fmt="csv",
            workers=2,
        )
        assert [d for d in cli.validate(cfg) if d.severity == "error"] == []


class TestDeterminism:
    def test_repeat_runs_are_byte_identical(self, tmp_path):
        cfg = write(tmp_path / "m.toml", MODEL_TOML)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run_cli("model", "--config", str(cfg), "--output", str(a), "--workers", "1") == 0
        assert run_cli("model", "--config", str(cfg), "--output", str(b), "--workers", "1") == 0
        assert a.read_bytes() == b.read_bytes()

    def test_parallel_matches_serial(self, tmp_path):
        cfg = write(tmp_path / "m.toml", MODEL_TOML)
        a, b = tmp_path / "ser.csv", tmp_path / "par.csv"
        assert run_cli("model", "--config", str(cfg), "--output", str(a), "--workers", "1") == 0
        assert run_cli("model", "--config", str(cfg), "--output", str(b), "--workers", "3") == 0
        assert a.read_bytes() == b.read_bytes()

    def test_manifest_echoes_fully_defaulted_config(self, tmp_path):
        cfg_path = write(tmp_path / "m.toml", MODEL_TOML)
        out = tmp_path / "a.csv"
        assert run_cli("model", "--config", str(cfg_path), "--output", str(out)) == 0
        manifest = json.loads((tmp_path / "a.manifest.json").read_text())
        echoed = manifest["config"]
        assert echoed["model"]["n_grid"] == [8, 16, 32, 64]
        assert echoed["model"]["s_points"] == 11
        assert echoed["bath"]["alpha"] == 0.1
        assert echoed["instance"]["n_sites"] == 64
        # lossless round trip through serialization
        assert json.loads(json.dumps(echoed)) == echoed
        assert "wall_time_s" in manifest
        assert manifest["versions"]["numpy"] == np.__version__


class TestWorkers:
    def test_env_var_sets_worker_count(self, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.WORKERS_ENV, "3")
        cfg = write(tmp_path / "m.toml", MODEL_TOML)
        out = tmp_path / "a.csv"
        assert run_cli("model", "--config", str(cfg), "--output", str(out)) == 0
        manifest = json.loads((tmp_path / "a.manifest.json").read_text())
        assert manifest["workers"] == 3

    def test_flag_overrides_env_var(self, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.WORKERS_ENV, "7")
        cfg = write(tmp_path / "m.toml", MODEL_TOML)
        out = tmp_path / "a.csv"
        assert run_cli("model", "--config", str(cfg), "--output", str(out), "--workers", "1") == 0
        manifest = json.loads((tmp_path / "a.manifest.json").read_text())
        assert manifest["workers"] == 1


class TestSubcommands:
    def test_renorm_alpha_zero_echoes_bare_splitting(self, tmp_path):
        cfg = write(
            tmp_path / "r.toml",
            '[bath]\nalpha = 0.0\n\n[renorm]\ndelta = 0.01\nprocess = "single"\n',
        )
        out = tmp_path / "r.csv"
        assert run_cli("renorm", "--config", str(cfg), "--output", str(out)) == 0
        _, rows = read_csv(out)
        assert rows[0]["delta_tilde"] == rows[0]["delta"]
        assert rows[0]["regime"] == "coherent"

    def test_model_csv_columns_and_content(self, tmp_path):
        cfg = write(tmp_path / "m.toml", MODEL_TOML)
        out = tmp_path / "m.csv"
        assert run_cli("model", "--config", str(cfg), "--output", str(out)) == 0
        header, rows = read_csv(out)
        assert header == ["N", "s", "epsilon", "delta", "gap"]
        assert len(rows) == 4 * 11
        first = rows[0]
        assert first["N"] == "8"
        assert float(first["gap"]) == pytest.approx(1.0, rel=1e-12)

    def test_json_format(self, tmp_path):
        cfg = write(tmp_path / "m.toml", MODEL_TOML)
        out = tmp_path / "m.json"
        assert run_cli("model", "--config", str(cfg), "--output", str(out), "--format", "json") == 0
        doc = json.loads(out.read_text())
        assert doc["columns"] == ["N", "s", "epsilon", "delta", "gap"]
        assert doc["rows"][0]["N"] == 8

    def test_rates_columns_and_fitted_slope(self, tmp_path):
        cfg = write(
            tmp_path / "r.toml",
            "[bath]\nalpha = 0.1\neta = 1.5\nomega_c = 10.0\n\n"
            '[rates]\nmethod = "golden-single"\nn_grid = [256, 1024, 4096, 16384, 65536]\n',
        )
        out = tmp_path / "r.csv"
        assert run_cli("rates", "--config", str(cfg), "--output", str(out)) == 0
        header, rows = read_csv(out)
        assert header == ["N", "rate", "method", "window", "truncation_error"]
        assert all(r["method"] == "golden-single" for r in rows)
        _, fit_rows = read_csv(tmp_path / "r.fit.csv")
        assert float(fit_rows[0]["exponent"]) == pytest.approx(-0.75, abs=0.02)

    def test_critical_emits_phase_boundary_and_fit(self, tmp_path):
        cfg = write(
            tmp_path / "c.toml",
            "[bath]\nalpha = 0.3\neta = 1.5\nomega_c = 1.0\n\n"
            '[critical]\nprocess = "single"\neta_grid = [1.5]\n'
            "n_grid = [256, 4096, 65536, 1048576]\ntemperature_grid = [0.01]\n",
        )
        out = tmp_path / "c.csv"
        assert run_cli("critical", "--config", str(cfg), "--output", str(out)) == 0
        header, rows = read_csv(out)
        assert header == ["eta", "T", "N", "alpha", "regime", "delta_tilde"]
        assert len(rows) == 4
        _, boundary = read_csv(tmp_path / "c.boundary.csv")
        temps = [float(r["T_star"]) for r in boundary]
        assert len(temps) == 4
        assert all(t > 0 for t in temps)
        assert temps == sorted(temps, reverse=True)
        _, fit = read_csv(tmp_path / "c.fit.csv")
        assert float(fit[0]["exponent"]) < 0

    def test_dynamics_trajectory_columns(self, tmp_path):
        cfg = write(
            tmp_path / "d.toml",
            "[instance]\nn_sites = 32\n\n"
            '[dynamics]\nschedule = "local-adiabatic"\nadiabaticity = 0.2\n'
            "samples = 9\ngamma_phi = 0.05\n",
        )
        out = tmp_path / "d.csv"
        assert run_cli("dynamics", "--config", str(cfg), "--output", str(out)) == 0
        header, rows = read_csv(out)
        assert header == ["t", "s", "x", "y", "z"]
        assert len(rows) == 9
        assert float(rows[0]["t"]) == 0.0
        assert float(rows[0]["s"]) == 0.0
        assert float(rows[-1]["s"]) == pytest.approx(1.0, abs=1e-12)
        manifest = json.loads((tmp_path / "d.manifest.json").read_text())
        assert 0.0 <= manifest["results"]["success_prob"] <= 1.0

    def test_dynamics_linear_needs_total_time(self, tmp_path, capsys):
        cfg = write(tmp_path / "d.toml", '[dynamics]\nschedule = "linear"\n')
        code = run_cli("dynamics", "--config", str(cfg), "--output", str(tmp_path / "o.csv"))
        assert code == cli.EXIT_CONFIG
        assert "total_time" in capsys.readouterr().err

    def test_runtime_scaling_writes_slope_file(self, tmp_path):
        cfg = write(
            tmp_path / "s.toml",
            "[dynamics]\nn_grid = [64, 256, 1024, 8192]\ntarget_success = 0.9\n"
            'schedule = "local-adiabatic"\n',
        )
        out = tmp_path / "s.csv"
        code = run_cli(
            "dynamics", "--runtime-scaling", "--config", str(cfg), "--output", str(out)
        )
        assert code == cli.EXIT_OK
        _, rows = read_csv(out)
        assert [r["N"] for r in rows] == ["64", "256", "1024", "8192"]
        _, fit = read_csv(tmp_path / "s.fit.csv")
        assert float(fit[0]["exponent"]) == pytest.approx(0.5, abs=0.06)

    def test_bogoliubov_text_and_binary_agree(self, tmp_path, capsys):
        m = 0.5 * np.array([[1.0, 0.4], [0.4, 1.0]])
        np.savetxt(tmp_path / "m.txt", m)
        np.save(tmp_path / "m.npy", m)
        cfg_t = write(tmp_path / "t.toml", '[bogoliubov]\nmatrix = "m.txt"\n')
        cfg_b = write(tmp_path / "b.toml", '[bogoliubov]\nmatrix = "m.npy"\n')
        out_t, out_b = tmp_path / "t.csv", tmp_path / "b.csv"
        assert run_cli("bogoliubov", "--config", str(cfg_t), "--output", str(out_t)) == 0
        text_stdout = capsys.readouterr().out
        assert run_cli("bogoliubov", "--config", str(cfg_b), "--output", str(out_b)) == 0
        binary_stdout = capsys.readouterr().out
        assert "lambda_0" in text_stdout
        assert "para_unitarity_residual" in text_stdout
        assert text_stdout == binary_stdout
        assert out_t.read_bytes() == out_b.read_bytes()
        _, rows = read_csv(out_t)
        assert float(rows[0]["frequency"]) == pytest.approx(np.sqrt(1.0 - 0.16), rel=1e-12)


def test_module_entry_point_runs(tmp_path):
    cfg = write(tmp_path / "m.toml", MODEL_TOML)
    out = tmp_path / "m.csv"
    proc = subprocess.run(
        [
            sys.executable,
            "-m",
            "openaqs",
            "model",
            "--config",
            str(cfg),
            "--output",
            str(out),
            "--workers",
            "1",
        ],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert out.exists()
