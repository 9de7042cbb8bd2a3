"""End-to-end tests of the command line."""

import pytest
import yaml

from app import main
from utils.csv_writer import read_csv


@pytest.fixture
def scenario(tmp_path):
    def write(data, name="scenario.yaml"):
        path = tmp_path / name
        path.write_text(yaml.safe_dump(data))
        return str(path)

    return write


def test_classify_writes_table_and_summary(scenario, tmp_path, capsys):
    out = tmp_path / "classify.csv"
    config = scenario({"command": "classify", "model": {"family": "jaynes_cummings", "gamma0": 5.0}, "tau": 3.0})
    assert main(["classify", "--config", config, "--output", str(out)]) == 0
    table = read_csv(out)
    assert list(table.columns) == ["t", "g", "h", "predicted_ratio", "pipeline_ratio", "gap"]
    assert table["gap"].max() < 1e-6
    printed = capsys.readouterr().out
    assert "class: Ci" in printed
    assert "formula: ci" in printed


def test_qsl_to_stdout(scenario, capsys):
    config = scenario({"command": "qsl", "model": {"family": "eternal_nm"}, "initial_state": {"a": 0.5}, "tau": [0.5, 1.0]})
    assert main(["qsl", "--config", config]) == 0
    text = capsys.readouterr().out
    assert text.startswith("# qslab_version:")
    assert "#   family: eternal_nm" in text
    assert "tau,a,theta,ratio," in text


def test_sweep_gamma0(scenario, tmp_path):
    out = tmp_path / "sweep.csv"
    config = scenario(
        {
            "command": "sweep-gamma0",
            "model": {"family": "jaynes_cummings"},
            "gamma0_grid": [0.2, 5.0],
            "tau": [1.0, 3.0],
            "output_path": str(out),
        }
    )
    assert main(["sweep-gamma0", "--config", config, "--threads", "2"]) == 0
    table = read_csv(out)
    assert len(table) == 4
    assert table["regime"].tolist() == ["markovian", "markovian", "non_markovian", "non_markovian"]
    assert (table["ratio_quadrature"] - table["ratio_closed_form"]).abs().max() < 1e-6


def test_region_trajectory_marks_crossings(scenario, tmp_path, capsys):
    out = tmp_path / "region.csv"
    config = scenario({"command": "region-trajectory", "model": {"family": "time_dependent"}, "region": {"t_max": 6.0}})
    assert main(["region-trajectory", "--config", config, "--output", str(out)]) == 0
    table = read_csv(out)
    assert table["crossing"].sum() == 3
    assert table["t"].is_monotonic_increasing
    assert "blp_boundary:" in capsys.readouterr().out


def test_state_scan(scenario, tmp_path, capsys):
    out = tmp_path / "scan.csv"
    config = scenario(
        {
            "command": "state-scan",
            "model": {"family": "pauli", "gamma1": 1.0, "gamma2": 2.0, "gamma3": 3.0},
            "a_grid": 11,
            "tau_grid": 16,
        }
    )
    assert main(["state-scan", "--config", config, "--output", str(out)]) == 0
    table = read_csv(out)
    assert len(table) == 11 * 16
    assert sorted(table.loc[table["optimal_flag"] == 1, "a"].unique()) == [0.0, 0.5, 1.0]
    assert "optimal a: 0, 0.5, 1" in capsys.readouterr().out


def test_blp(scenario, tmp_path, capsys):
    out = tmp_path / "blp.csv"
    config = scenario(
        {"command": "blp", "model": {"family": "jaynes_cummings", "gamma0": 5.0}, "tau": [3.0], "pair_search_resolution": 48}
    )
    assert main(["blp", "--config", config, "--output", str(out)]) == 0
    row = read_csv(out).iloc[0]
    assert row["blp"] > row["blp_z_pair"] > 0.0
    assert row["pair_kind"] == "equatorial"
    assert row["blp_analytic"] == pytest.approx(row["blp_z_pair"], abs=1e-8)
    assert row["cp_violated"] == 1
    assert "(equatorial pair)" in capsys.readouterr().out


class TestExitCodes:
    def test_configuration_error(self, scenario, capsys):
        config = scenario({"command": "qsl", "model": {"family": "lorentzian"}})
        assert main(["qsl", "--config", config]) == 2
        assert "ConfigurationError" in capsys.readouterr().err

    @pytest.mark.parametrize(
        "body, field_path",
        [
            ("model:\n  family: eternal_nm\ntau: .nan\n", "tau"),
            ("model:\n  family: eternal_nm\ntau: [1.0, .inf]\n", "tau"),
            ("model:\n  family: phase_covariant\n  gamma1: .inf\n  gamma2: 1.0\n", "model.gamma1.value"),
        ],
    )
    def test_non_finite_numbers(self, tmp_path, capsys, body, field_path):
        path = tmp_path / "scenario.yaml"
        path.write_text("command: qsl\n" + body)
        assert main(["qsl", "--config", str(path)]) == 2
        err = capsys.readouterr().err
        assert "ConfigurationError" in err
        assert field_path in err

    def test_missing_file(self, tmp_path):
        assert main(["qsl", "--config", str(tmp_path / "absent.yaml")]) == 2

    def test_step_override_is_validated(self, scenario):
        config = scenario({"command": "qsl", "model": {"family": "eternal_nm"}})
        assert main(["qsl", "--config", config, "--steps", "4"]) == 2

    def test_bad_thread_environment(self, scenario, monkeypatch):
        monkeypatch.setenv("QSLAB_THREADS", "many")
        config = scenario({"command": "qsl", "model": {"family": "eternal_nm"}})
        assert main(["qsl", "--config", config]) == 2

    def test_step_size_gate(self, scenario, capsys):
        model = {"family": "generic_lindblad", "jumps": [{"operator": "sigma_minus", "rate": 400.0}]}
        config = scenario({"command": "qsl", "model": model, "steps": 16})
        assert main(["qsl", "--config", config]) == 3
        assert "StepSizeError" in capsys.readouterr().err

    def test_unphysical_map(self, scenario):
        model = {"family": "generic_lindblad", "jumps": [{"operator": "sigma_minus", "rate": -1.0}]}
        config = scenario({"command": "qsl", "model": model, "steps": 256})
        assert main(["qsl", "--config", config]) == 4
