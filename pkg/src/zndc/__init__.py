"""Zero-norm distance to controllability of linear systems.

Exact and heuristic tools for the fewest entries (or affine parameters)
of ``(A, B)`` that must change for the pair to become controllable.
"""

from .bounds import EXCEEDS, lower_bound_dedicated_inputs, upper_bound, upper_bound_witness
from .cccp import CccpConfig, run_cccp
from .greedy import GreedyConfig, greedy_zndc
from .model import (
    AffineSystem,
    LinearSystem,
    PatternMatrix,
    controllability_matrix_rank,
    is_controllable_pbh,
    verify_feasibility,
)
from .oracle import exact_min_support_affine, exact_zndc
from .structural import StructuralChecker, is_structurally_controllable

__version__ = "0.1.0"
