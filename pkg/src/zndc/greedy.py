"""Greedy selection of perturbable entries (structural index ascent)."""

import csv
from dataclasses import dataclass, field

from .model import PatternMatrix
from .structural import StructuralChecker


@dataclass
class GreedyConfig:
    """Settings for :func:`greedy_zndc`.

    `candidates` holds 0-based ``(row, col)`` positions of the ``n x (n+m)``
    perturbation matrix; ``None`` means every entry.
    """

    gamma: float = 1.0
    candidates: frozenset = None
    max_steps: int = None
    tie_break: str = "lexicographic"
    seed: int = 0

    def resolved_candidates(self, n, m):
        if self.candidates is None:
            return sorted((r, c) for r in range(n) for c in range(n + m))
        return sorted(self.candidates)

    def validate(self, n, m):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.tie_break != "lexicographic":
            raise ValueError(f"unknown tie_break rule {self.tie_break!r}")
        cands = self.resolved_candidates(n, m)
        if not cands:
            raise ValueError("candidate set is empty")
        for r, c in cands:
            if not (0 <= r < n and 0 <= c < n + m):
                raise ValueError(f"candidate ({r}, {c}) outside the {n}x{n + m} perturbation")


@dataclass(frozen=True)
class GreedyStep:
    entry: tuple
    g1: int
    g2: int
    g: float


@dataclass
class GreedyTrace:
    steps: list = field(default_factory=list)
    pattern: PatternMatrix = None
    success: bool = False
    initial: GreedyStep = None

    @property
    def cardinality(self):
        return len(self.pattern)

    def to_csv(self, path_or_file):
        """Write ``step,row,col,g1,g2,g`` rows with 1-based indices; step 0 is the start."""
        own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
        fh = open(path_or_file, "w", newline="") if own else path_or_file
        try:
            w = csv.writer(fh)
            w.writerow(["step", "row", "col", "g1", "g2", "g"])
            if self.initial is not None:
                w.writerow([0, "", "", self.initial.g1, self.initial.g2, repr(self.initial.g)])
            for k, st in enumerate(self.steps, start=1):
                w.writerow([k, st.entry[0] + 1, st.entry[1] + 1, st.g1, st.g2, repr(st.g)])
        finally:
            if own:
                fh.close()


def objective_g(sys, pattern, distinct_eigs=None, gamma=1.0, checker=None):
    """``(g1, g2, g1 + gamma * g2)`` for a perturbation pattern.

    ``g1`` sums the mixed-rank cardinalities over the distinct eigenvalues
    and ``g2`` counts input-reachable ``z`` vertices.  When `distinct_eigs`
    is given it replaces the checker's own eigenvalue list.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if checker is None or distinct_eigs is not None:
        checker = StructuralChecker(sys, eigs=distinct_eigs)
    g1 = sum(checker.mixed_rank(k, pattern).cardinality for k in range(checker.p))
    g2 = checker.g2(pattern)
    return g1, g2, g1 + gamma * g2


def greedy_zndc(sys, config=None, checker=None):
    """Add the entry with the largest gain in ``g`` until the target is hit.

    The target is ``p n + gamma (n + m)``.  Ties go to the lexicographically
    smallest ``(row, col)``; when no candidate increases ``g`` the smallest
    unused candidate is added anyway.  Failure (candidates or steps
    exhausted) is reported through ``trace.success``.
    """
    config = config or GreedyConfig()
    n, m = sys.n, sys.m
    config.validate(n, m)
    checker = checker or StructuralChecker(sys, seed=config.seed)
    gamma = config.gamma
    cands = config.resolved_candidates(n, m)
    max_steps = len(cands) if config.max_steps is None else config.max_steps
    p = checker.p

    pattern = PatternMatrix(n, n + m)
    certs = [checker.mixed_rank(k, pattern) for k in range(p)]
    g1 = sum(c.cardinality for c in certs)
    g2 = checker.g2(pattern)
    trace = GreedyTrace(pattern=pattern, initial=GreedyStep(None, g1, g2, g1 + gamma * g2))

    def done(g1, g2):
        return g1 == p * n and g2 == n + m

    used = set()
    while not done(g1, g2) and len(trace.steps) < max_steps:
        best = None
        for entry in cands:
            if entry in used:
                continue
            trial = pattern.with_entries([entry])
            t_certs = [
                certs[k]
                if certs[k].cardinality == n
                else checker.mixed_rank(k, trial, initial=certs[k].common_independent_set)
                for k in range(p)
            ]
            t1 = sum(c.cardinality for c in t_certs)
            t2 = checker.g2(trial)
            gain = (t1 - g1) + gamma * (t2 - g2)
            if best is None or gain > best[0]:
                best = (gain, entry, t_certs, t1, t2)
        if best is None:
            break
        _, entry, certs, g1, g2 = best
        used.add(entry)
        pattern = pattern.with_entries([entry])
        trace.steps.append(GreedyStep(entry, g1, g2, g1 + gamma * g2))
    trace.pattern = pattern
    trace.success = done(g1, g2)
    return trace
