"""Tests for scenario validation and loading."""

from pathlib import Path

import numpy as np
import pytest
import yaml

from core.exceptions import ConfigurationError
from core.generators import GenericLindblad, JaynesCummings, PhaseCovariant
from utils.config_loader import environment_defaults, load_config, parse_config

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def _qsl(**model):
    return {"command": "qsl", "model": model}


@pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.yaml")), ids=lambda p: p.stem)
def test_shipped_configs_validate(path):
    config = load_config(path)
    assert config.output_path.startswith("outputs/")
    config.model.to_spec()


def test_bare_numbers_are_constant_rates():
    config = parse_config(_qsl(family="phase_covariant", gamma1=1, gamma2=2.5))
    spec = config.model.to_spec()
    assert isinstance(spec, PhaseCovariant)
    rates = spec.rate_set()
    assert float(rates.gamma2.evaluate(7.0)) == 2.5
    assert float(rates.gamma3.evaluate(7.0)) == 0.0


def test_rate_kinds():
    config = parse_config(
        _qsl(
            family="commutative_phase_covariant",
            kappa=0.5,
            gamma={"kind": "exp_sinusoid", "offset": 1.0, "cos_coef": 2.0, "frequency": 2.0},
            gamma3={"kind": "tanh", "scale": 0.5},
        )
    )
    rates = config.model.to_spec().rate_set()
    assert rates.kappa == 0.5
    assert float(rates.gamma1.evaluate(0.0)) == pytest.approx(3.0)
    assert float(rates.gamma2.evaluate(0.0)) == pytest.approx(1.5)
    assert float(rates.gamma3.evaluate(1.0)) == pytest.approx(0.5 * np.tanh(1.0))


def test_generic_lindblad():
    config = parse_config(
        _qsl(family="generic_lindblad", hamiltonian={"x": 0.5}, jumps=[{"operator": "sigma_minus", "rate": 1.0}])
    )
    spec = config.model.to_spec()
    assert isinstance(spec, GenericLindblad)
    assert len(spec.jump_terms()) == 1


def test_defaults_are_materialized():
    config = parse_config(_qsl(family="jaynes_cummings"))
    assert isinstance(config.model.to_spec(), JaynesCummings)
    resolved = config.resolved()
    assert resolved["steps"] == 2048
    assert resolved["a_grid"] == 101
    assert resolved["model"] == {"family": "jaynes_cummings", "gamma0": 1.0, "lam": 1.0}
    assert resolved["initial_state"] == {"a": 1.0, "theta": 0.0}
    # The header writer dumps this mapping as YAML.
    assert yaml.safe_load(yaml.safe_dump(resolved)) == resolved


def test_tau_values_and_gamma0_grid():
    config = parse_config(
        {
            "command": "sweep-gamma0",
            "model": {"family": "jaynes_cummings"},
            "tau": [1.0, 2.0],
            "gamma0_grid": {"start": 0.1, "stop": 1.0, "num": 10},
        }
    )
    assert config.tau_values == (1.0, 2.0)
    np.testing.assert_allclose(config.gamma0_values, np.linspace(0.1, 1.0, 10))
    listed = parse_config({**config.resolved(), "gamma0_grid": [0.2, 0.4]})
    np.testing.assert_array_equal(listed.gamma0_values, [0.2, 0.4])


def test_overrides_skip_none():
    config = parse_config(_qsl(family="eternal_nm"), {"steps": 512, "threads": None})
    assert config.steps == 512
    assert "threads" not in config.model_fields_set


class TestErrors:
    @pytest.mark.parametrize(
        "data, field_path",
        [
            (_qsl(family="phase_covariant", gamma1=1.0, gamma2=1.0, gamma4=1.0), "model.gamma4"),
            (_qsl(family="jaynes_cummings", gamma0=-1.0), "model.gamma0"),
            (_qsl(family="pauli", gamma1=1.0, gamma2=1.0), "model.gamma3"),
            ({**_qsl(family="eternal_nm"), "tau": -1.0}, "tau"),
            ({**_qsl(family="eternal_nm"), "a_grid": 5}, "a_grid"),
            ({**_qsl(family="eternal_nm"), "initial_state": {"a": 1.5}}, "initial_state.a"),
            (_qsl(family="lorentzian"), "model"),
            ({**_qsl(family="eternal_nm"), "tau": float("nan")}, "tau"),
            ({**_qsl(family="eternal_nm"), "tau": float("inf")}, "tau"),
            (_qsl(family="phase_covariant", gamma1=float("inf"), gamma2=1.0), "model.gamma1.value"),
            (_qsl(family="jaynes_cummings", gamma0=float("nan")), "model.gamma0"),
        ],
    )
    def test_field_paths(self, data, field_path):
        with pytest.raises(ConfigurationError) as excinfo:
            parse_config(data)
        assert excinfo.value.field_path == field_path
        assert excinfo.value.exit_code == 2

    def test_command_requirements(self):
        with pytest.raises(ConfigurationError, match="gamma0_grid"):
            parse_config({"command": "sweep-gamma0", "model": {"family": "jaynes_cummings"}})
        with pytest.raises(ConfigurationError, match="jaynes_cummings"):
            parse_config({"command": "sweep-gamma0", "model": {"family": "eternal_nm"}, "gamma0_grid": [1.0]})
        with pytest.raises(ConfigurationError, match="region"):
            parse_config({"command": "region-trajectory", "model": {"family": "time_dependent"}})
        with pytest.raises(ConfigurationError, match="phase-covariant"):
            parse_config({"command": "region-trajectory", "model": {"family": "eternal_nm"}, "region": {"t_max": 1.0}})

    def test_tabulated_lengths(self):
        rate = {"kind": "tabulated", "times": [0.0, 1.0, 2.0], "values": [1.0, 2.0]}
        with pytest.raises(ConfigurationError, match="same length"):
            parse_config(_qsl(family="commutative_phase_covariant", kappa=0.5, gamma=rate))

    def test_files(self, tmp_path):
        with pytest.raises(ConfigurationError, match="not found"):
            load_config(tmp_path / "missing.yaml")
        broken = tmp_path / "broken.yaml"
        broken.write_text("command: [qsl\n")
        with pytest.raises(ConfigurationError, match="Invalid YAML"):
            load_config(broken)
        listing = tmp_path / "list.yaml"
        listing.write_text("- qsl\n")
        with pytest.raises(ConfigurationError, match="mapping"):
            load_config(listing)


def test_environment_defaults(monkeypatch):
    monkeypatch.setenv("QSLAB_THREADS", "4")
    monkeypatch.setenv("QSLAB_LOG_LEVEL", "debug")
    assert environment_defaults() == {"log_level": "DEBUG", "threads": 4}
    monkeypatch.setenv("QSLAB_THREADS", "many")
    with pytest.raises(ConfigurationError) as excinfo:
        environment_defaults()
    assert excinfo.value.field_path == "QSLAB_THREADS"
