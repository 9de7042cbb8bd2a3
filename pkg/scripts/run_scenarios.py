"""
Run every shipped scenario under configs/ and write its CSV.
"""

import logging
import sys
from pathlib import Path

project_root = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(project_root))

from core.exceptions import QSLabError  # noqa: E402
from core.orchestrator import LabOrchestrator  # noqa: E402
from utils.config_loader import environment_defaults, load_config  # noqa: E402
from utils.csv_writer import write_csv  # noqa: E402

logger = logging.getLogger(__name__)


def main() -> int:
    env = environment_defaults()
    logging.basicConfig(level=getattr(logging, env["log_level"], logging.INFO))
    orchestrator = LabOrchestrator(threads=env["threads"])
    failures = 0

    for config_path in sorted((project_root / "configs").glob("*.yaml")):
        print(f"Running {config_path.name}...")
        try:
            config = load_config(config_path)
            result = orchestrator.run(config)
        except QSLabError as exc:
            failures += 1
            print(f"❌ {config_path.name}: {exc}")
            continue
        output = project_root / (config.output_path or f"outputs/{config_path.stem}.csv")
        write_csv(result["table"], output, config.resolved())
        print(f"✅ {config_path.name} -> {output.relative_to(project_root)}")

    print("✅ All scenarios reproduced." if not failures else f"❌ {failures} scenario(s) failed.")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
