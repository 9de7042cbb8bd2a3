"""
QSLab Orchestrator - runs one scenario end to end and returns its table.
"""

import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, Iterable, List

import numpy as np
import pandas as pd
from tqdm import tqdm

from analyzers.nonmarkov import NonMarkovAnalyzer, blp_jc_analytic, region_boundaries, region_crossings
from analyzers.optimality import OptimalityAnalyzer
from analyzers.qsl_metrics import QSLAnalyzer, qsl_ratio_jc_closed, qsl_time
from analyzers.taxonomy import TaxonomyAnalyzer
from core.constants import TOL
from core.exceptions import ConfigurationError, NumericalGateError
from core.generators import JaynesCummings, PhaseCovariantForm
from core.jaynes_cummings import jc_critical_coupling, jc_first_revival_time
from core.propagation import resolve_steps
from core.qubit import PureState
from utils.config_loader import ScenarioConfig

logger = logging.getLogger(__name__)


def _progress(items: Iterable, total: int, desc: str) -> Iterable:
    return tqdm(items, total=total, desc=desc, disable=not sys.stderr.isatty())


class LabOrchestrator:
    """Dispatches a scenario to the analyzers and applies the self-check gates."""

    def __init__(self, threads: int = 1):
        self.threads = threads
        self.qsl_analyzer = QSLAnalyzer()
        self.optimality_analyzer = OptimalityAnalyzer(threads=threads)
        self.taxonomy_analyzer = TaxonomyAnalyzer()
        logger.info(f"QSLab Orchestrator initialized with {threads} thread(s)")

    # --------------------------------------------------
    # Main Pipeline
    # --------------------------------------------------

    def run(self, config: ScenarioConfig) -> Dict[str, Any]:
        """
        Execute the command named by ``config`` and return {"table", "summary"}.
        """
        commands: Dict[str, Callable[[ScenarioConfig], Dict[str, Any]]] = {
            "sweep-gamma0": self.sweep_gamma0,
            "state-scan": self.state_scan,
            "region-trajectory": self.region_trajectory,
            "classify": self.classify,
            "blp": self.blp,
            "qsl": self.qsl,
        }
        logger.info(f"Starting {config.command} for {config.model.family}")
        try:
            result = commands[config.command](config)
        except Exception as e:
            logger.error(f"Error in {config.command} pipeline: {str(e)}", exc_info=True)
            raise
        logger.info(f"{config.command} complete: {len(result['table'])} rows")
        return result

    def _steps(self, config: ScenarioConfig, tau: float) -> int:
        return resolve_steps(tau, steps_per_unit_time=config.steps)

    def _map(self, func: Callable, cells: List, desc: str) -> List:
        if self.threads > 1 and len(cells) > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as executor:
                return list(_progress(executor.map(func, cells), len(cells), desc))
        return [func(cell) for cell in _progress(cells, len(cells), desc)]

    @staticmethod
    def _gate(gap: float, what: str) -> None:
        if np.isfinite(gap) and gap > TOL.gate:
            raise NumericalGateError(f"{what} differs by {gap:.3e} (gate {TOL.gate:g})")

    # --------------------------------------------------
    # Commands
    # --------------------------------------------------

    def sweep_gamma0(self, config: ScenarioConfig) -> Dict[str, Any]:
        lam = config.model.lam
        critical = jc_critical_coupling(lam)
        cells = [(float(g0), float(tau)) for g0 in config.gamma0_values for tau in config.tau_values]
        excited = PureState(1.0)

        logger.info(f"Step 1/2: Sweeping {len(cells)} (gamma0, tau) cells...")

        def evaluate(cell):
            gamma0, tau = cell
            spec = JaynesCummings(gamma0, lam)
            quadrature = qsl_time(spec, excited, tau, self._steps(config, tau)).ratio
            closed = qsl_ratio_jc_closed(tau, gamma0, lam)
            return {
                "gamma0": gamma0,
                "tau": tau,
                "ratio_quadrature": quadrature,
                "ratio_closed_form": closed,
                "blp": blp_jc_analytic(tau, gamma0, lam),
                "first_revival": jc_first_revival_time(gamma0, lam),
                "regime": "markovian" if gamma0 <= critical else "non_markovian",
                "critical": bool(np.isclose(gamma0, critical, rtol=0.0, atol=1e-12)),
            }

        table = pd.DataFrame(self._map(evaluate, cells, "sweep-gamma0"))

        logger.info("Step 2/2: Checking closed form against quadrature...")
        gap = float(np.max(np.abs(table["ratio_quadrature"] - table["ratio_closed_form"]))) if len(table) else 0.0
        self._gate(gap, "JC closed-form ratio")
        return {"table": table, "summary": {"critical_gamma0": critical, "max_gap": gap}}

    def state_scan(self, config: ScenarioConfig) -> Dict[str, Any]:
        spec = config.model.to_spec()
        tau = max(config.tau_values)
        if tau <= 0.0:
            raise ConfigurationError("state-scan needs a positive tau", field_path="tau")

        logger.info(f"Step 1/2: Scanning {config.a_grid}x{config.theta_grid} initial states up to tau={tau}...")
        analysis = self.optimality_analyzer.process(
            spec, tau, config.a_grid, config.theta_grid, config.tau_grid, self._steps(config, tau)
        )
        scan = analysis["scan"]

        logger.info("Step 2/2: Tabulating ratios...")
        optimal = scan.optimal
        rows = [
            {
                "tau": float(t),
                "a": float(a),
                "theta": float(theta),
                "ratio": float(scan.ratios[i, j, k]),
                "optimal_flag": int(optimal[i, j]),
            }
            for k, t in enumerate(scan.taus)
            for i, a in enumerate(scan.a_values)
            for j, theta in enumerate(scan.thetas)
        ]
        summary = {"optimal_set": scan.optimal_set().tolist(), "polished_roots": analysis["polished_roots"]}
        return {"table": pd.DataFrame(rows), "summary": summary}

    def region_trajectory(self, config: ScenarioConfig) -> Dict[str, Any]:
        spec = config.model.to_spec()
        if not isinstance(spec, PhaseCovariantForm) or isinstance(spec, JaynesCummings):
            raise ConfigurationError("region-trajectory needs a phase-covariant model without rate poles", field_path="model")
        rates = spec.rate_set()
        region = config.region

        logger.info(f"Step 1/2: Locating boundary crossings on (0, {region.t_max}]...")
        crossings = region_crossings(rates, region.t_max, region.samples)

        logger.info("Step 2/2: Sampling boundary lines...")
        times = np.union1d(np.linspace(0.0, region.t_max, region.rows), crossings["all"])
        table = pd.DataFrame({"t": times, **region_boundaries(rates, times)})
        table["crossing"] = np.isin(times, crossings["all"]).astype(int)
        return {"table": table, "summary": {name: roots for name, roots in crossings.items()}}

    def classify(self, config: ScenarioConfig) -> Dict[str, Any]:
        spec = config.model.to_spec()
        tau = max(config.tau_values)

        logger.info(f"Step 1/2: Classifying {spec.family} on [0, {tau}]...")
        analysis = self.taxonomy_analyzer.process(spec, tau, self._steps(config, tau))
        label = analysis["label"]

        logger.info("Step 2/2: Comparing class formula with quadrature...")
        table = pd.DataFrame(
            {
                "t": analysis["times"],
                "g": analysis["g"],
                "h": analysis["h"],
                "predicted_ratio": analysis["predicted_ratio"],
                "pipeline_ratio": analysis["pipeline_ratio"],
                "gap": analysis["gap"],
            }
        )
        if analysis["max_gap"] is not None:
            self._gate(analysis["max_gap"], f"Class {label.label} ratio")
        return {"table": table, "summary": {"label": label, "max_gap": analysis["max_gap"]}}

    def blp(self, config: ScenarioConfig) -> Dict[str, Any]:
        spec = config.model.to_spec()
        analyzer = NonMarkovAnalyzer(config.pair_search_resolution, config.full_search, self.threads)
        rows = []
        for index, tau in enumerate(config.tau_values, start=1):
            logger.info(f"Step {index}/{len(config.tau_values)}: Backflow up to tau={tau}...")
            result = analyzer.process(spec, tau, self._steps(config, tau))
            measure, z_pair = result["blp"], result["blp_z_pair"]
            r1, r2 = (r.as_array() for r in measure.pair)
            analytic = result.get("blp_analytic")
            if analytic is not None:
                self._gate(abs(analytic.value - z_pair.value), "Closed-form backflow")
            rows.append(
                {
                    "tau": tau,
                    "blp": measure.value,
                    "pair_kind": measure.pair_kind,
                    "blp_z_pair": z_pair.value,
                    "blp_analytic": np.nan if analytic is None else analytic.value,
                    "r1_x": r1[0], "r1_y": r1[1], "r1_z": r1[2],
                    "r2_x": r2[0], "r2_y": r2[1], "r2_z": r2[2],
                    "cp_violated": int(result["cp_divisibility"].violated),
                    "cp_first_violation": result["cp_divisibility"].first_violation,
                }
            )
        best = max(rows, key=lambda row: row["blp"])
        return {"table": pd.DataFrame(rows), "summary": {"max_blp": best["blp"], "max_blp_pair": best["pair_kind"]}}

    def qsl(self, config: ScenarioConfig) -> Dict[str, Any]:
        spec = config.model.to_spec()
        psi0 = config.initial_state.to_state()
        rows = []
        for index, tau in enumerate(config.tau_values, start=1):
            logger.info(f"Step {index}/{len(config.tau_values)}: Speed limit at tau={tau}...")
            analysis = self.qsl_analyzer.process(spec, psi0, tau, self._steps(config, tau))
            result, closed = analysis["qsl"], analysis["closed_form"]
            if closed is not None:
                self._gate(abs(closed - result.ratio), "JC closed-form ratio")
            rows.append(
                {
                    "tau": tau,
                    "a": psi0.a,
                    "theta": psi0.theta,
                    "ratio": result.ratio,
                    "tau_qsl": result.tau_qsl,
                    "tau_qsl_tr": result.tau_qsl_tr,
                    "tau_qsl_hs": result.tau_qsl_hs,
                    "lambda_op": result.lambda_op,
                    "lambda_tr": result.lambda_tr,
                    "lambda_hs": result.lambda_hs,
                    "bures": result.bures,
                    "fidelity": result.fidelity,
                    "revivals_F": result.revivals_F,
                    "ratio_closed_form": np.nan if closed is None else closed,
                }
            )
        return {"table": pd.DataFrame(rows), "summary": {"ratios": [r["ratio"] for r in rows]}}

