"""Distribution-free goodness-of-fit tests for parametric copula families."""

__version__ = "0.1.0"

from .copulas import get_copula  # noqa: E402
from .estimation import Dataset, fit_model, pseudo_observations  # noqa: E402
from .margins import get_margin  # noqa: E402
from .transform import GridSpec, ScoreContext, compute_Wn, test_statistics  # noqa: E402
from .wiener import ReferenceTable, build_reference, reference_lookup  # noqa: E402

__all__ = [
    "Dataset",
    "GridSpec",
    "ReferenceTable",
    "ScoreContext",
    "build_reference",
    "compute_Wn",
    "fit_model",
    "get_copula",
    "get_margin",
    "pseudo_observations",
    "reference_lookup",
    "test_statistics",
]
