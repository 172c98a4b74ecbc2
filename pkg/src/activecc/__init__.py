"""Cold-start active correlation clustering.

Core pieces: the clustering objective (:mod:`.model`), a local-search solver
(:mod:`.solver`), the mean-field posterior and entropy score
(:mod:`.meanfield`), coverage-aware batch selection (:mod:`.coverage`), the
simulated oracle and datasets (:mod:`.data`) and the experiment loop
(:mod:`.harness`).
"""

from .config import ExperimentConfig, load_config
from .coverage import StrategyConfig, select_batch
from .harness import RoundRecord, run_active_cc, run_repetitions
from .meanfield import MeanFieldParams, mean_field
from .metrics import adjusted_rand_index
from .model import Clustering, SimilarityState, cc_cost, mc_cost, violates
from .solver import SolverParams, local_search_cc

__version__ = "0.1.0"

__all__ = [
    "Clustering",
    "ExperimentConfig",
    "MeanFieldParams",
    "RoundRecord",
    "SimilarityState",
    "SolverParams",
    "StrategyConfig",
    "adjusted_rand_index",
    "cc_cost",
    "load_config",
    "local_search_cc",
    "mc_cost",
    "mean_field",
    "run_active_cc",
    "run_repetitions",
    "select_batch",
    "violates",
]
