"""QSLab analyzers: speed limits, backflow, optimal states and map classes."""

from .nonmarkov import NonMarkovAnalyzer
from .optimality import OptimalityAnalyzer
from .qsl_metrics import QSLAnalyzer
from .taxonomy import TaxonomyAnalyzer

__all__ = [
    "NonMarkovAnalyzer",
    "OptimalityAnalyzer",
    "QSLAnalyzer",
    "TaxonomyAnalyzer",
]
