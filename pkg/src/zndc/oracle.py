"""Exhaustive ground-truth solvers for small instances."""

import itertools
from math import comb

import numpy as np

from .bounds import EXCEEDS, lower_bound_dedicated_inputs, upper_bound
from .errors import EnumerationLimitError
from .model import PatternMatrix, is_controllable_pbh
from .numerics import RANK_TOL
from .structural import StructuralChecker

ENUMERATION_LIMIT = 10**7


def _budget(n_items, max_card):
    return sum(comb(n_items, k) for k in range(max_card + 1))


def exact_zndc(sys, candidates=None, max_card=None, seed=0, tol_rel=RANK_TOL, use_lower_bound=True):
    """Smallest feasible perturbation support, by enumeration.

    Supports are scanned by increasing size and lexicographically within a
    size, and the first one passing the structural test is returned.
    Without `max_card` the search stops at ``n - rank B`` for the full
    candidate set and at ``len(candidates)`` for a restricted one.  Sizes
    below the dedicated-input lower bound are skipped since no support there
    can be feasible.

    Returns
    -------
    (int or str, PatternMatrix or None)
        ``(r_c, witness)``, or ``(EXCEEDS, None)`` when nothing of size
        ``<= max_card`` works.
    """
    n, m = sys.n, sys.m
    if candidates is None:
        cands = [(r, c) for r in range(n) for c in range(n + m)]
    else:
        cands = sorted(candidates)
    if max_card is None:
        # the chain construction always succeeds within this many entries
        max_card = max(upper_bound(sys, tol_rel), 1 if m else 0)
        if candidates is not None:
            max_card = len(cands)
    max_card = min(max_card, len(cands))
    if _budget(len(cands), max_card) > ENUMERATION_LIMIT:
        raise EnumerationLimitError(
            f"{_budget(len(cands), max_card)} supports exceed the limit {ENUMERATION_LIMIT}"
        )
    empty = PatternMatrix(n, n + m)
    if is_controllable_pbh(sys, tol_rel):
        return 0, empty
    start = 1
    if use_lower_bound:
        lb = lower_bound_dedicated_inputs(sys, min(max_card, n), tol_rel)
        if lb == EXCEEDS:
            return EXCEEDS, None
        start = max(1, lb)
    checker = StructuralChecker(sys, seed=seed, tol_rel=tol_rel)
    # a support must cover the worst rank deficiency in distinct rows and columns
    need = max(checker.deficiencies(), default=0)
    for k in range(max(start, need), max_card + 1):
        for support in itertools.combinations(cands, k):
            if len({r for r, _ in support}) < need or len({c for _, c in support}) < need:
                continue
            pattern = PatternMatrix(n, n + m, frozenset(support))
            if checker.is_structurally_controllable(pattern):
                return k, pattern
    return EXCEEDS, None


def exact_min_support_affine(affine, max_card=None, trials=10, seed=0, tol_rel=RANK_TOL):
    """Sparsest parameter support giving a controllable member of the family.

    A support is accepted when one of `trials` random parameter vectors on it
    (entries uniform in [0.1, 1]) passes the PBH test.

    Returns
    -------
    (int or str, tuple or None)
        ``(size, support)`` with 0-based parameter indices, or
        ``(EXCEEDS, None)``.
    """
    l = affine.n_params
    max_card = l if max_card is None else min(max_card, l)
    if _budget(l, max_card) * trials > ENUMERATION_LIMIT:
        raise EnumerationLimitError("parameter enumeration exceeds the limit")
    rng = np.random.default_rng(seed)
    for k in range(max_card + 1):
        for support in itertools.combinations(range(l), k):
            for _ in range(trials if k else 1):
                theta = np.zeros(l)
                theta[list(support)] = rng.uniform(0.1, 1.0, size=k)
                if is_controllable_pbh(affine.evaluate(theta), tol_rel):
                    return k, support
    return EXCEEDS, None
