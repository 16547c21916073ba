"""Ordered-tree edit distances with learnable costs and metric-property checks."""

from .costs import CostTable, EmbeddingMatrix, check_pseudometric, metric_projection, simplex_init, uniform_cost
from .gesl import GeslConfig, PairSet, gesl_fit
from .lvq import LvqConfig, lvq_fit
from .ted import count_cooptimal, summarize_cooptimal, ted_dp, tree_distance, true_distance_oracle
from .trees import Alphabet, Dataset, Tree, load_dataset, parse_tree

__all__ = [
    "Alphabet", "CostTable", "Dataset", "EmbeddingMatrix", "GeslConfig", "LvqConfig", "PairSet", "Tree",
    "check_pseudometric", "count_cooptimal", "gesl_fit", "load_dataset", "lvq_fit", "metric_projection",
    "parse_tree", "simplex_init", "summarize_cooptimal", "ted_dp", "tree_distance", "true_distance_oracle",
    "uniform_cost",
]
