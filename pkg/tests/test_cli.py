import json
import math

import pytest

from dotphase import cli, qpe
from dotphase.errors import NumericalInvariantError

TWO_PI = 2 * math.pi


def run_cli(args, capsys):
    code = cli.main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(args, capsys):
    code, out, err = run_cli(args, capsys)
    assert code == 0, err
    return json.loads(out)


class TestEstimate:
    def test_representable_exact(self, capsys):
        report = run_json(
            ["estimate", "--m", "3", "--phase", "0.625turn", "--shots", "0"], capsys
        )
        results = report["results"]
        assert results["readout_integer"] == 5
        assert results["estimated_phase_rad"] == pytest.approx(TWO_PI * 0.625)
        assert results["eta_percent"] == pytest.approx(100.0)
        assert results["max_probability"] == pytest.approx(1.0, abs=1e-10)

    def test_shot_determinism(self, capsys):
        args = ["estimate", "--m", "3", "--phase", "0.625turn",
                "--shots", "100", "--seed", "7"]
        report = run_json(args, capsys)
        estimates = report["results"]["estimates_rad"]
        assert len(estimates) == 100
        assert all(e == pytest.approx(TWO_PI * 0.625) for e in estimates)
        assert run_json(args, capsys)["results"] == report["results"]

    def test_phase_out_of_range(self, capsys):
        code, _, err = run_cli(["estimate", "--m", "3", "--phase", "7.0"], capsys)
        assert code == 1
        assert "phase" in err

    def test_bad_angle_suffix(self, capsys):
        code, _, _ = run_cli(["estimate", "--m", "3", "--phase", "1.0furlong"], capsys)
        assert code == 1

    def test_missing_required(self, capsys):
        code, _, err = run_cli(["estimate", "--m", "3"], capsys)
        assert code == 1
        assert "phase_rad" in err

    def test_full_distribution_flag(self, capsys):
        report = run_json(
            ["estimate", "--m", "2", "--phase", "0.25turn", "--shots", "5",
             "--seed", "1", "--full-distribution"],
            capsys,
        )
        assert len(report["results"]["distribution"]) == 4


class TestSweep:
    def test_row_table(self, capsys):
        report = run_json(
            ["sweep", "--m-values", "5,6,7", "--n", "3",
             "--random-phases", "20", "--seed", "3"],
            capsys,
        )
        rows = report["results"]["rows"]
        assert len(rows) == 60
        for row in rows:
            assert row["empirical_success"] >= row["bound"] - 1e-9

    def test_csv_output(self, capsys, tmp_path):
        out = tmp_path / "sweep.csv"
        code, _, err = run_cli(
            ["sweep", "--m-values", "5", "--n", "3", "--phases", "0.625turn",
             "--format", "csv", "--output", str(out)],
            capsys,
        )
        assert code == 0, err
        lines = out.read_text().splitlines()
        assert lines[0] == "m,n,phi_rad,empirical_success,bound"
        assert len(lines) == 2
        assert float(lines[1].split(",")[3]) == pytest.approx(1.0, abs=1e-10)

    def test_empty_phase_list(self, capsys):
        code, _, _ = run_cli(
            ["sweep", "--m-values", "5", "--n", "3", "--phases", ""], capsys
        )
        assert code == 1

    def test_undefined_bound_rejected(self, capsys):
        code, _, err = run_cli(
            ["sweep", "--m-values", "4", "--n", "3", "--phases", "1.0"], capsys
        )
        assert code == 1
        assert "m >= n + 2" in err

    def test_representable_phase_all_ones(self, capsys):
        report = run_json(
            ["sweep", "--m-values", "5,6", "--n", "3", "--phases", "0.375turn"],
            capsys,
        )
        assert all(
            row["empirical_success"] == pytest.approx(1.0)
            for row in report["results"]["rows"]
        )


class TestPulseFit:
    def test_hadamard_preset_reports_gap(self, capsys):
        report = run_json(["pulse-fit", "--preset", "hadamard"], capsys)
        assert report["results"]["prescribed_pulse_gap"] == pytest.approx(2.0)
        assert report["results"]["residual"] < 1e-8
        assert report["warnings"]

    def test_pulse_phase_preset_in_model(self, capsys):
        report = run_json(["pulse-fit", "--preset", "pulse-phase:0.7"], capsys)
        assert report["results"]["residual"] < 1e-8

    def test_malformed_matrix(self, capsys):
        code, _, _ = run_cli(["pulse-fit", "--matrix", "1,2,3"], capsys)
        assert code == 1

    def test_non_unitary_matrix(self, capsys):
        code, _, _ = run_cli(
            ["pulse-fit", "--matrix", "1,0,0,0,0,0,2,0"], capsys
        )
        assert code == 1

    def test_explicit_matrix(self, capsys):
        s = 1 / math.sqrt(2)
        flat = [s, 0, s, 0, s, 0, -s, 0]
        report = run_json(
            ["pulse-fit", "--matrix", ",".join(str(v) for v in flat)], capsys
        )
        assert report["results"]["residual"] < 1e-8


class TestCalibrateClock:
    def test_accurate(self, capsys):
        report = run_json(
            ["calibrate-clock", "--duration", "1.0", "--total-scales", "60",
             "--elapsed-scales", "60", "--t-ideal", "1.0"],
            capsys,
        )
        assert report["results"]["verdict"] == "accurate"

    def test_deviation_increase(self, capsys):
        report = run_json(
            ["calibrate-clock", "--duration", "0.9", "--total-scales", "60",
             "--elapsed-scales", "60", "--t-ideal", "1.0",
             "--comparison-mode", "deviation"],
            capsys,
        )
        assert report["results"]["verdict"] == "increase-frequency"

    def test_zero_elapsed_scales(self, capsys):
        code, _, _ = run_cli(
            ["calibrate-clock", "--duration", "1.0", "--total-scales", "60",
             "--elapsed-scales", "0", "--t-ideal", "1.0"],
            capsys,
        )
        assert code == 1

    def test_varphi_input(self, capsys):
        report = run_json(
            ["calibrate-clock", "--varphi", "0.625", "--total-scales", "10",
             "--elapsed-scales", "10", "--t-ideal", "1.0",
             "--varpi", "1.0", "--n0", "1.0", "--n-vac", "1.0",
             "--r63", "1.0", "--e-field", "1.0"],
            capsys,
        )
        assert report["results"]["T"] == pytest.approx(3.5 * math.pi)


class TestFeasibility:
    def test_defaults(self, capsys):
        report = run_json(["feasibility"], capsys)
        results = report["results"]
        assert results["gamma"] == pytest.approx(9.99999e-7, rel=1e-5)
        assert results["max_qubits"] == 447
        assert results["omega_eff"] == {"value": pytest.approx(30.0), "unit": "MHz"}
        assert any("unit" in w for w in report["warnings"])

    def test_over_budget_warning(self, capsys):
        report = run_json(["feasibility", "--n-qubits", "450"], capsys)
        assert report["results"]["protocol_time_s"] == pytest.approx(10.1025)
        assert any("exceeds the coherence budget" in w for w in report["warnings"])

    def test_zero_detuning(self, capsys):
        code, _, _ = run_cli(["feasibility", "--delta", "0"], capsys)
        assert code == 1


class TestConfigFileAndReplay:
    def test_config_file_with_flag_override(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"m": 3, "phase_rad": "0.625turn", "seed": 1}))
        report = run_json(
            ["estimate", "--config", str(cfg), "--seed", "2"], capsys
        )
        assert report["config"]["m"] == 3
        assert report["config"]["seed"] == 2

    def test_unknown_config_key(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"m": 3, "phase_rad": 1.0, "bogus": 1}))
        code, _, err = run_cli(["estimate", "--config", str(cfg)], capsys)
        assert code == 1
        assert "bogus" in err

    def test_command_mismatch(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"command": "sweep"}))
        code, _, _ = run_cli(["estimate", "--config", str(cfg)], capsys)
        assert code == 1

    @pytest.mark.parametrize(
        "args",
        [
            ["estimate", "--m", "4", "--phase", "0.3turn", "--shots", "25",
             "--seed", "11"],
            ["sweep", "--m-values", "5,6", "--n", "3", "--random-phases", "5",
             "--seed", "4"],
            ["feasibility", "--n-qubits", "100"],
        ],
    )
    def test_replay_from_echoed_config(self, capsys, tmp_path, args):
        first = run_json(args, capsys)
        cfg = tmp_path / "replay.json"
        cfg.write_text(json.dumps(first["config"]))
        second = run_json([args[0], "--config", str(cfg)], capsys)
        assert json.dumps(second["results"], sort_keys=True) == json.dumps(
            first["results"], sort_keys=True
        )

    def test_output_dir_env(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path))
        code, out, err = run_cli(
            ["feasibility", "--output", "report.json"], capsys
        )
        assert code == 0, err
        assert (tmp_path / "report.json").exists()


class TestExitCodes:
    def test_usage_error(self, capsys):
        code, _, _ = run_cli(["estimate", "--m", "not-a-number",
                              "--phase", "1"], capsys)
        assert code == 1

    def test_numerical_invariant_maps_to_2(self, capsys, monkeypatch):
        def boom(config):
            raise NumericalInvariantError("synthetic drift")

        monkeypatch.setattr(qpe, "readout_distribution", boom)
        code, _, err = run_cli(["estimate", "--m", "3", "--phase", "1.0"], capsys)
        assert code == 2
        assert "invariant" in err
