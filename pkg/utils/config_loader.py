"""
Scenario configuration: YAML files validated by pydantic models.

One file fully determines a run. Every default is materialized by
``ScenarioConfig.resolved()`` so it can be written into the output header.
"""

import logging
import os
from pathlib import Path
from typing import Annotated, Any, ClassVar, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, ValidationInfo, field_validator, model_validator

from core.constants import DEFAULT_PAIR_RESOLUTION, DEFAULT_REGION_SAMPLES, DEFAULT_STEPS_PER_UNIT_TIME, DEFAULT_TAU_SUBGRID
from core.exceptions import ConfigurationError
from core.generators import (
    EternalNM,
    GeneratorFamily,
    GenericLindblad,
    JaynesCummings,
    Pauli,
    PhaseCovariant,
    TimeDependentModel,
)
from core.qubit import PAULI, SIGMA_MINUS, SIGMA_PLUS, PureState
from core.rates import (
    ConstantRate,
    ExpSinusoidRate,
    JaynesCummingsRate,
    RateFunction,
    RateSet,
    TabulatedRate,
    TanhRate,
)

logger = logging.getLogger(__name__)

COMMANDS = ("sweep-gamma0", "state-scan", "region-trajectory", "classify", "blp", "qsl")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, allow_inf_nan=False)


# --------------------------------------------------
# Rates
# --------------------------------------------------


class ConstantRateConfig(_Strict):
    kind: Literal["constant"] = "constant"
    value: float

    def to_rate(self) -> RateFunction:
        return ConstantRate(self.value)


class JaynesCummingsRateConfig(_Strict):
    kind: Literal["jaynes_cummings"]
    gamma0: float = Field(gt=0.0)
    lam: float = Field(gt=0.0)

    def to_rate(self) -> RateFunction:
        return JaynesCummingsRate(self.gamma0, self.lam)


class TanhRateConfig(_Strict):
    kind: Literal["tanh"]
    scale: float
    offset: float = 0.0

    def to_rate(self) -> RateFunction:
        return TanhRate(self.scale, self.offset)


class ExpSinusoidRateConfig(_Strict):
    kind: Literal["exp_sinusoid"]
    amplitude: float = 1.0
    decay: float = 0.0
    offset: float = 0.0
    sin_coef: float = 0.0
    cos_coef: float = 0.0
    frequency: float = 1.0

    def to_rate(self) -> RateFunction:
        return ExpSinusoidRate(self.amplitude, self.decay, self.offset, self.sin_coef, self.cos_coef, self.frequency)


class TabulatedRateConfig(_Strict):
    kind: Literal["tabulated"]
    times: List[float] = Field(min_length=2)
    values: List[float] = Field(min_length=2)

    @model_validator(mode="after")
    def _same_length(self):
        if len(self.times) != len(self.values):
            raise ValueError("times and values must have the same length")
        return self

    def to_rate(self) -> RateFunction:
        return TabulatedRate(tuple(self.times), tuple(self.values))


RateConfig = Annotated[
    Union[ConstantRateConfig, JaynesCummingsRateConfig, TanhRateConfig, ExpSinusoidRateConfig, TabulatedRateConfig],
    Field(discriminator="kind"),
]


def _bare_number(value: Any) -> Any:
    """A plain number is shorthand for a constant rate."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return {"kind": "constant", "value": float(value)}
    return value


def _rate_coercer(*fields: str) -> Any:
    """Before-validator applying `_bare_number` to the given rate fields.

    Bound to explicit field names rather than "*" so it never touches the
    `family` discriminator, which pydantic forbids.
    """

    def _coerce_rates(cls, value: Any, info: ValidationInfo) -> Any:
        return _bare_number(value) if info.field_name in cls.rate_fields else value

    return field_validator(*fields, mode="before")(_coerce_rates)


class _RateHolder(_Strict):
    rate_fields: ClassVar[Tuple[str, ...]] = ()


# --------------------------------------------------
# Models
# --------------------------------------------------


class PhaseCovariantConfig(_RateHolder):
    rate_fields: ClassVar[Tuple[str, ...]] = ("gamma1", "gamma2", "gamma3", "omega")
    _coerce_rates = _rate_coercer(*rate_fields)

    family: Literal["phase_covariant"]
    gamma1: RateConfig
    gamma2: RateConfig
    gamma3: RateConfig = ConstantRateConfig(value=0.0)
    omega: RateConfig = ConstantRateConfig(value=0.0)

    def to_spec(self) -> GeneratorFamily:
        rates = RateSet(self.gamma1.to_rate(), self.gamma2.to_rate(), self.gamma3.to_rate(), self.omega.to_rate())
        return PhaseCovariant(rates)


class CommutativePhaseCovariantConfig(_RateHolder):
    rate_fields: ClassVar[Tuple[str, ...]] = ("gamma", "gamma3", "omega")
    _coerce_rates = _rate_coercer(*rate_fields)

    family: Literal["commutative_phase_covariant"]
    gamma: RateConfig
    kappa: float = Field(ge=0.0, le=1.0)
    gamma3: RateConfig = ConstantRateConfig(value=0.0)
    omega: RateConfig = ConstantRateConfig(value=0.0)

    def to_spec(self) -> GeneratorFamily:
        rates = RateSet.commutative(self.gamma.to_rate(), self.kappa, self.gamma3.to_rate(), self.omega.to_rate())
        return PhaseCovariant(rates)


class PauliConfig(_RateHolder):
    rate_fields: ClassVar[Tuple[str, ...]] = ("gamma1", "gamma2", "gamma3")
    _coerce_rates = _rate_coercer(*rate_fields)

    family: Literal["pauli"]
    gamma1: RateConfig
    gamma2: RateConfig
    gamma3: RateConfig

    def to_spec(self) -> GeneratorFamily:
        return Pauli(RateSet(self.gamma1.to_rate(), self.gamma2.to_rate(), self.gamma3.to_rate()))


class JaynesCummingsConfig(_Strict):
    family: Literal["jaynes_cummings"]
    gamma0: float = Field(default=1.0, gt=0.0)
    lam: float = Field(default=1.0, gt=0.0)

    def to_spec(self) -> GeneratorFamily:
        return JaynesCummings(self.gamma0, self.lam)


class EternalNMConfig(_Strict):
    family: Literal["eternal_nm"]

    def to_spec(self) -> GeneratorFamily:
        return EternalNM()


class TimeDependentConfig(_Strict):
    family: Literal["time_dependent"]

    def to_spec(self) -> GeneratorFamily:
        return TimeDependentModel()


OPERATORS = {
    "sigma_x": PAULI[0],
    "sigma_y": PAULI[1],
    "sigma_z": PAULI[2],
    "sigma_plus": SIGMA_PLUS,
    "sigma_minus": SIGMA_MINUS,
}


class JumpConfig(_RateHolder):
    rate_fields: ClassVar[Tuple[str, ...]] = ("rate",)
    _coerce_rates = _rate_coercer(*rate_fields)

    operator: Literal["sigma_x", "sigma_y", "sigma_z", "sigma_plus", "sigma_minus"]
    rate: RateConfig


class HamiltonianConfig(_Strict):
    """Pauli coefficients of H = x sigma_x + y sigma_y + z sigma_z."""

    x: float = 0.0
    y: float = 0.0
    z: float = 0.0


class GenericLindbladConfig(_Strict):
    family: Literal["generic_lindblad"]
    hamiltonian: HamiltonianConfig = HamiltonianConfig()
    jumps: List[JumpConfig] = Field(min_length=1)

    def to_spec(self) -> GeneratorFamily:
        h = self.hamiltonian
        matrix = h.x * PAULI[0] + h.y * PAULI[1] + h.z * PAULI[2]
        jumps = tuple((OPERATORS[j.operator], j.rate.to_rate()) for j in self.jumps)
        return GenericLindblad(matrix, jumps)


ModelConfig = Annotated[
    Union[
        PhaseCovariantConfig,
        CommutativePhaseCovariantConfig,
        PauliConfig,
        JaynesCummingsConfig,
        EternalNMConfig,
        TimeDependentConfig,
        GenericLindbladConfig,
    ],
    Field(discriminator="family"),
]


# --------------------------------------------------
# Scenario
# --------------------------------------------------


class GridConfig(_Strict):
    start: float
    stop: float
    num: int = Field(ge=2)

    @model_validator(mode="after")
    def _ordered(self):
        if self.stop <= self.start:
            raise ValueError("stop must exceed start")
        return self

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.num)


class RegionConfig(_Strict):
    t_max: float = Field(gt=0.0)
    samples: int = Field(default=DEFAULT_REGION_SAMPLES, ge=16)
    rows: int = Field(default=201, ge=2)


class InitialStateConfig(_Strict):
    a: float = Field(default=1.0, ge=0.0, le=1.0)
    theta: float = 0.0

    def to_state(self) -> PureState:
        return PureState(self.a, self.theta)


class ScenarioConfig(_Strict):
    command: Literal["sweep-gamma0", "state-scan", "region-trajectory", "classify", "blp", "qsl"]
    model: ModelConfig
    tau: Union[float, List[float]] = 1.0
    steps: int = Field(default=DEFAULT_STEPS_PER_UNIT_TIME, ge=16, description="steps per unit time")
    a_grid: int = Field(default=101, ge=11)
    theta_grid: int = Field(default=1, ge=1)
    tau_grid: int = Field(default=DEFAULT_TAU_SUBGRID, ge=2)
    pair_search_resolution: int = Field(default=DEFAULT_PAIR_RESOLUTION, ge=8)
    full_search: bool = False
    gamma0_grid: Optional[Union[GridConfig, List[float]]] = None
    region: Optional[RegionConfig] = None
    initial_state: InitialStateConfig = InitialStateConfig()
    threads: int = Field(default=1, ge=1)
    output_path: Optional[str] = None

    @field_validator("tau")
    @classmethod
    def _non_negative(cls, value):
        values = value if isinstance(value, list) else [value]
        if not values or not all(np.isfinite(t) and t >= 0.0 for t in values):
            raise ValueError("tau values must be finite and non-negative")
        return value

    @model_validator(mode="after")
    def _command_requirements(self):
        if self.command == "sweep-gamma0":
            if self.model.family != "jaynes_cummings":
                raise ValueError("sweep-gamma0 needs a jaynes_cummings model")
            if self.gamma0_grid is None:
                raise ValueError("sweep-gamma0 needs gamma0_grid")
        if self.command == "region-trajectory":
            if self.model.family not in ("phase_covariant", "commutative_phase_covariant", "time_dependent"):
                raise ValueError("region-trajectory needs a phase-covariant model")
            if self.region is None:
                raise ValueError("region-trajectory needs a region block")
        return self

    @property
    def tau_values(self) -> Tuple[float, ...]:
        return tuple(self.tau) if isinstance(self.tau, list) else (float(self.tau),)

    @property
    def gamma0_values(self) -> np.ndarray:
        grid = self.gamma0_grid
        if grid is None:
            return np.empty(0)
        return grid.values() if isinstance(grid, GridConfig) else np.asarray(grid, dtype=float)

    def resolved(self) -> Dict[str, Any]:
        """All fields, defaults included, as plain data."""
        return self.model_dump(mode="json")


# --------------------------------------------------
# Loading
# --------------------------------------------------


def _field_path(error: Dict[str, Any]) -> str:
    # Discriminated unions put the tag in the location; drop it.
    parts = [str(p) for p in error["loc"]]
    tags = {
        "constant", "jaynes_cummings", "tanh", "exp_sinusoid", "tabulated",
        "phase_covariant", "commutative_phase_covariant", "pauli", "eternal_nm",
        "time_dependent", "generic_lindblad", "GridConfig", "float", "list[float]",
    }
    return ".".join(p for p in parts if p not in tags) or "<root>"


def environment_defaults() -> Dict[str, Any]:
    """QSLAB_LOG_LEVEL and QSLAB_THREADS from the environment or a .env file."""
    load_dotenv()
    threads = os.getenv("QSLAB_THREADS", "1")
    try:
        threads_value = int(threads)
    except ValueError:
        raise ConfigurationError(f"QSLAB_THREADS must be an integer, got {threads!r}", field_path="QSLAB_THREADS")
    return {"log_level": os.getenv("QSLAB_LOG_LEVEL", "INFO").upper(), "threads": threads_value}


def parse_config(data: Dict[str, Any], overrides: Optional[Dict[str, Any]] = None) -> ScenarioConfig:
    """Validate a mapping (plus non-None overrides) into a ScenarioConfig.

    Raises:
        ConfigurationError: naming the first offending field path.
    """
    if not isinstance(data, dict):
        raise ConfigurationError("Scenario file must contain a mapping at the top level")
    merged = dict(data)
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value
    try:
        return ScenarioConfig.model_validate(merged)
    except ValidationError as exc:
        first = exc.errors()[0]
        raise ConfigurationError(first["msg"], field_path=_field_path(first)) from exc


def load_config(path: Union[str, Path], overrides: Optional[Dict[str, Any]] = None) -> ScenarioConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"Config file not found: {path}")
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"Invalid YAML in {path}: {exc}") from exc
    config = parse_config(data or {}, overrides)
    logger.info(f"Loaded {config.command} scenario for {config.model.family} from {path}")
    return config
