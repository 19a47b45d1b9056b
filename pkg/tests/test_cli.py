import json
import math

import numpy as np
import pytest
from click.testing import CliRunner

import eqsim.optics
from eqsim.cli import (
    ConfigError,
    fit_noise_model_amplitude,
    main,
    parse_angle,
    parse_gt_grid,
)


@pytest.fixture
def runner():
    return CliRunner()


class TestParsing:
    def test_parse_angle_pi_forms(self):
        assert parse_angle("pi") == pytest.approx(math.pi)
        assert parse_angle("pi/4") == pytest.approx(math.pi / 4)
        assert parse_angle("0.5*pi") == pytest.approx(math.pi / 2)
        assert parse_angle("3*pi/4") == pytest.approx(3 * math.pi / 4)
        assert parse_angle("1.25") == 1.25

    def test_parse_grid_list_and_linspace(self):
        assert parse_gt_grid("0,pi/8,pi/4") == pytest.approx((0, math.pi / 8, math.pi / 4))
        grid = parse_gt_grid("0:pi:5")
        assert len(grid) == 5
        assert grid[-1] == pytest.approx(math.pi)

    def test_bad_grid_names_field(self):
        with pytest.raises(ConfigError) as err:
            parse_gt_grid("0,banana")
        assert "gt-grid" in str(err.value)


class TestConcurrenceSweep:
    def test_exact_mode_reference_values(self, runner, tmp_path):
        out = tmp_path / "sweep.csv"
        result = runner.invoke(
            main,
            ["concurrence-sweep", "--gt-grid", "0,pi/8,pi/4", "--epsilon", "1",
             "--out", str(out), "--no-plot"],
        )
        assert result.exit_code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "gt,epsilon,c_exact,c_estimate,c_sigma,shots,seed"
        c_exact = [float(l.split(",")[2]) for l in lines[1:]]
        assert c_exact == pytest.approx([0.0, math.sqrt(2) / 2, 1.0], abs=1e-10)

    def test_optics_mode_matches_exact(self, runner, tmp_path):
        out_a = tmp_path / "exact.csv"
        out_b = tmp_path / "optics.csv"
        for mode, out in (("exact", out_a), ("optics", out_b)):
            result = runner.invoke(
                main,
                ["concurrence-sweep", "--gt-grid", "0,pi/8,pi/4", "--mode", mode,
                 "--out", str(out), "--no-plot"],
            )
            assert result.exit_code == 0
        col_a = [l.split(",")[3] for l in out_a.read_text().splitlines()[1:]]
        col_b = [l.split(",")[3] for l in out_b.read_text().splitlines()[1:]]
        for a, b in zip(col_a, col_b):
            assert float(a) == pytest.approx(float(b), abs=1e-10)

    def test_pump_100_gives_paper_maximum(self, runner, tmp_path):
        out = tmp_path / "pump.csv"
        result = runner.invoke(
            main,
            ["concurrence-sweep", "--gt-grid", "pi/4", "--epsilon", "0.37",
             "--out", str(out), "--no-plot"],
        )
        assert result.exit_code == 0
        row = out.read_text().splitlines()[1].split(",")
        assert float(row[2]) == pytest.approx(0.37, abs=1e-12)
        assert float(row[3]) == pytest.approx(0.37, abs=1e-12)

    def test_byte_identical_reruns(self, runner, tmp_path):
        args = ["concurrence-sweep", "--gt-grid", "0:pi:9", "--epsilon", "0.7",
                "--shots", "2000", "--seed", "11", "--no-plot"]
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert runner.invoke(main, args + ["--out", str(out1)]).exit_code == 0
        assert runner.invoke(main, args + ["--out", str(out2)]).exit_code == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_shots_mode_requires_shots(self, runner):
        result = runner.invoke(main, ["concurrence-sweep", "--mode", "shots"])
        assert result.exit_code == 1
        assert "shots" in result.output

    def test_epsilon_and_pump_conflict(self, runner):
        result = runner.invoke(
            main, ["concurrence-sweep", "--epsilon", "0.5", "--pump", "10"]
        )
        assert result.exit_code == 1
        assert "epsilon" in result.output

    def test_plot_without_out_is_invalid(self, runner):
        result = runner.invoke(main, ["concurrence-sweep", "--plot"])
        assert result.exit_code == 1
        assert "out" in result.output

    def test_plot_written_next_to_csv(self, runner, tmp_path):
        out = tmp_path / "fig.csv"
        result = runner.invoke(
            main,
            ["concurrence-sweep", "--gt-grid", "0:pi:5", "--out", str(out)],
        )
        assert result.exit_code == 0
        assert (tmp_path / "fig.png").exists()

    def test_config_file_with_flag_override(self, runner, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "# sweep settings\n"
            "gt-grid = 0,pi/4\n"
            "epsilon = 0.5\n"
            "seed = 4\n"
        )
        out = tmp_path / "cfg.csv"
        result = runner.invoke(
            main,
            ["concurrence-sweep", "--config", str(cfg), "--epsilon", "1.0",
             "--out", str(out), "--no-plot"],
        )
        assert result.exit_code == 0
        rows = out.read_text().splitlines()[1:]
        assert len(rows) == 2
        assert float(rows[1].split(",")[1]) == 1.0  # flag beat the file

    def test_stdout_csv_when_no_out(self, runner):
        result = runner.invoke(
            main, ["concurrence-sweep", "--gt-grid", "pi/4", "--no-plot"]
        )
        assert result.exit_code == 0
        assert result.output.startswith("gt,epsilon,")


class TestTomographyRun:
    def test_ideal_limit_amplitude(self, runner, tmp_path):
        out = tmp_path / "tomo.csv"
        result = runner.invoke(
            main,
            ["tomography-run", "--gt-grid", "0:pi:9", "--epsilon", "1",
             "--shots", "200000", "--seed", "3", "--mc", "0",
             "--out", str(out), "--no-plot", "--json"],
        )
        assert result.exit_code == 0
        summary = json.loads(result.stdout)["summary"]
        assert summary["fit_amplitude"] == pytest.approx(1.0, abs=0.005)

    def test_byte_identical_reruns(self, runner, tmp_path):
        args = ["tomography-run", "--gt-grid", "0:pi:5", "--epsilon", "0.9",
                "--shots", "5000", "--seed", "21", "--mc", "20", "--no-plot"]
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert runner.invoke(main, args + ["--out", str(out1)]).exit_code == 0
        assert runner.invoke(main, args + ["--out", str(out2)]).exit_code == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_plot_written(self, runner, tmp_path):
        out = tmp_path / "tomo.csv"
        result = runner.invoke(
            main,
            ["tomography-run", "--gt-grid", "0:pi:5", "--epsilon", "0.9",
             "--shots", "2000", "--mc", "0", "--out", str(out)],
        )
        assert result.exit_code == 0
        assert (tmp_path / "tomo.png").exists()


class TestFitModel:
    def test_recovers_exact_curve(self):
        gts = np.linspace(0, math.pi, 17)
        eps = 0.83
        curve = np.maximum(0.0, eps * np.abs(np.sin(2 * gts)) - (1 - eps) / 2)
        eps_hat, amp = fit_noise_model_amplitude(gts, curve)
        assert eps_hat == pytest.approx(eps, abs=5e-4)
        assert amp == pytest.approx((3 * eps - 1) / 2, abs=1e-3)


class TestOpticsCheck:
    def test_passes_and_reports_eight_rows(self, runner):
        result = runner.invoke(main, ["optics-check", "--json"])
        assert result.exit_code == 0
        rows = json.loads(result.stdout)
        assert len(rows) == 8
        signs = {r["input"]: math.copysign(1.0, r["amplitude"]) for r in rows}
        assert signs["vhv"] == -1.0 and signs["vvh"] == -1.0
        assert sum(1 for s in signs.values() if s > 0) == 6

    def test_csv_output(self, runner, tmp_path):
        out = tmp_path / "table.csv"
        result = runner.invoke(main, ["optics-check", "--out", str(out)])
        assert result.exit_code == 0
        assert out.read_text().splitlines()[0].startswith("input,amplitude")


class TestRates:
    def test_builtin_pipelines(self, runner):
        result = runner.invoke(main, ["rates", "--json"])
        assert result.exit_code == 0
        report = json.loads(result.stdout)
        assert report["two-photon"]["rate_hz"] == pytest.approx(13333.33, rel=1e-4)
        assert 0.1 < report["three-photon"]["rate_hz"] < 10.0

    def test_custom_stages(self, runner):
        result = runner.invoke(
            main, ["rates", "--stages", "source=150kHz,transmission=0.8,gate=1/9", "--json"]
        )
        assert result.exit_code == 0
        assert json.loads(result.stdout)["custom"]["rate_hz"] == pytest.approx(
            13333.33, rel=1e-4
        )

    def test_bad_stage_spec(self, runner):
        result = runner.invoke(main, ["rates", "--stages", "nonsense"])
        assert result.exit_code == 1
        assert "stages" in result.output


class TestVerify:
    def test_fresh_build_passes(self, runner):
        result = runner.invoke(main, ["verify"])
        assert result.exit_code == 0
        assert "FAIL" not in result.output

    def test_json_report(self, runner):
        result = runner.invoke(main, ["verify", "--json"])
        assert result.exit_code == 0
        report = json.loads(result.stdout)
        names = {r["name"] for r in report}
        assert "ppbs-sign-table" in names
        assert all(r["passed"] for r in report)

    def test_fault_injection_names_sign_table(self, runner, monkeypatch):
        # Corrupt the splitter sign convention; verify must fail and point at
        # the sign-table check.
        original = eqsim.optics._splitter_block

        def corrupted(t):
            block = original(t).copy()
            block[1, 1] = -block[1, 1]
            return block

        monkeypatch.setattr(eqsim.optics, "_splitter_block", corrupted)
        result = runner.invoke(main, ["verify"])
        assert result.exit_code == 2
        assert "[FAIL] ppbs-sign-table" in result.output
