"""QSLab utilities: scenario configuration and CSV output."""

from .config_loader import ScenarioConfig, load_config, parse_config
from .csv_writer import read_csv, write_csv

__all__ = [
    "ScenarioConfig",
    "load_config",
    "parse_config",
    "read_csv",
    "write_csv",
]
