"""Correlation testing for unlabeled random graph pairs.

Implements, at desk scale, the complete machinery for testing whether two
randomly relabeled graphs are edge-correlated: samplers for the null and
planted models (Gaussian weights and subsampled Erdos-Renyi), detection
statistics with analytic thresholds, the orbit algebra of the induced edge
permutation, exact and Monte-Carlo second moments, and enumeration of the
orbit forests and pseudoforests that control the conditional second moment.
Every nontrivial formula ships with an independent brute-force oracle.
"""

from .errors import ExactLimitError
from .graphs import BinaryGraph, Permutation, WeightedGraph, intersect, relabel
from .sampling import ErParams, GaussianParams, SeedSpec, rho_er

__all__ = [
    "BinaryGraph",
    "Permutation",
    "WeightedGraph",
    "intersect",
    "relabel",
    "ErParams",
    "GaussianParams",
    "SeedSpec",
    "rho_er",
    "ExactLimitError",
]

__version__ = "0.1.0"
