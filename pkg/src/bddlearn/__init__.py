"""Learn compact binary decision diagram classifiers with SAT and MaxSAT."""

__version__ = "0.1.0"

from .bdd import Bdd, TruthTable, beads, classify, classify_table, gen_bdd, node_count
from .data import Dataset, RawTable, Split, load_csv, one_hot_binarize
from .search import LearnConfig, LearnedModel, cross_validate, evaluate, learn, min_depth

__all__ = [
    "__version__",
    "Bdd",
    "TruthTable",
    "Dataset",
    "RawTable",
    "Split",
    "LearnConfig",
    "LearnedModel",
    "beads",
    "classify",
    "classify_table",
    "gen_bdd",
    "node_count",
    "load_csv",
    "one_hot_binarize",
    "learn",
    "evaluate",
    "min_depth",
    "cross_validate",
]
