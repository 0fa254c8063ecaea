"""Upper and lower bounds on the zero-norm distance to controllability."""

import itertools

import numpy as np

from .model import LinearSystem, PatternMatrix, is_controllable_pbh
from .numerics import RANK_TOL, numerical_rank, rank_abs


def upper_bound(sys, tol_rel=RANK_TOL):
    """``n - rank B``.

    When ``rank B = 0`` the bound is ``n``; the matching construction (see
    :func:`upper_bound_witness`) then spends one entry on ``B``.
    """
    return sys.n - numerical_rank(sys.B, tol_rel)


def upper_bound_witness(sys, tol_rel=RANK_TOL):
    """Feasible pattern of size ``n - rank B`` built from a chain of A-entries.

    With ``r = rank B`` and rows ``R`` of ``B`` (restricted to ``r``
    independent columns) linearly independent, order the states as ``R``
    followed by the rest; the pattern then frees entries
    ``(order[r + i], order[i])`` for ``i < n - r``.  If ``B`` is zero one
    input entry ``(0, n)`` is freed first and ``r`` is taken as 1.
    """
    n, m = sys.n, sys.m
    entries = []
    b = sys.B
    r = numerical_rank(b, tol_rel) if b.size else 0
    if r == 0:
        if m == 0:
            raise ValueError("a system without inputs has no feasible perturbation")
        entries.append((0, n))
        rows = [0]
    else:
        scale = np.linalg.norm(b, 2)
        thresh = tol_rel * scale * max(b.shape)
        cols = []
        for k in range(m):
            if rank_abs(b[:, cols + [k]], thresh) == len(cols) + 1:
                cols.append(k)
        rows = []
        for i in range(n):
            if rank_abs(b[np.ix_(rows + [i], cols)], thresh) == len(rows) + 1:
                rows.append(i)
            if len(rows) == len(cols):
                break
    order = rows + [i for i in range(n) if i not in rows]
    k = len(rows)
    for i in range(n - k):
        entries.append((order[k + i], order[i]))
    return PatternMatrix(n, n + m, frozenset(entries))


EXCEEDS = "exceeds max_card"


def dedicated_input_system(sys, states):
    """``(A, [B, I(:, J)])`` for a list of state indices ``J``."""
    extra = np.eye(sys.n)[:, list(states)]
    return LinearSystem(sys.A, np.hstack([sys.B, extra]))


def lower_bound_dedicated_inputs(sys, max_card=None, tol_rel=RANK_TOL, return_witness=False):
    """Fewest dedicated inputs making the pair controllable.

    Subsets are enumerated by increasing size, lexicographically within a
    size.  Returns :data:`EXCEEDS` when no subset of size ``<= max_card``
    works.
    """
    n = sys.n
    max_card = n if max_card is None else max_card
    if max_card > n:
        raise ValueError("max_card cannot exceed n")
    for k in range(max_card + 1):
        for states in itertools.combinations(range(n), k):
            if is_controllable_pbh(dedicated_input_system(sys, states), tol_rel):
                return (k, states) if return_witness else k
    return (EXCEEDS, None) if return_witness else EXCEEDS
