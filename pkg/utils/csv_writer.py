"""
Deterministic CSV output.

Header lines starting with "# " carry the resolved scenario and the package
version; the table follows with 17 significant digits and "\\n" line endings.
"""

import io
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

import pandas as pd
import yaml

from core import __version__

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def header_lines(resolved: Dict[str, Any]) -> str:
    """YAML dump of the resolved config, each line prefixed with '# '."""
    body = yaml.safe_dump(resolved, sort_keys=True, default_flow_style=False)
    lines = [f"# qslab_version: {__version__}"]
    lines.extend(f"# {line}" for line in body.splitlines())
    return "\n".join(lines) + "\n"


def render_csv(table: pd.DataFrame, resolved: Optional[Dict[str, Any]] = None) -> str:
    buffer = io.StringIO()
    if resolved is not None:
        buffer.write(header_lines(resolved))
    table.to_csv(buffer, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return buffer.getvalue()


def write_csv(
    table: pd.DataFrame,
    path: Union[str, Path],
    resolved: Optional[Dict[str, Any]] = None,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        f.write(render_csv(table, resolved))
    logger.info(f"Wrote {len(table)} rows to {path}")
    return path


def read_csv(path: Union[str, Path]) -> pd.DataFrame:
    """Read a table written by ``write_csv``, skipping the header comments."""
    return pd.read_csv(path, comment="#")
