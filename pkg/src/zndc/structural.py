"""Structural controllability of a pair under sparse entry perturbations.

A perturbation pattern ``P = [PA, PB]`` (``n x (n+m)``) is feasible when some
realization ``[dA, dB]`` of it makes ``(A + dA, B + dB)`` controllable.  The
test used here has two parts:

* a rank part: at every distinct eigenvalue ``lam`` of ``A`` the largest
  common independent set of the column matroids of ``[I_n, lam I - A, B]``
  (numeric) and ``[P^T, Ī_{n+m}]`` (generic) must have size ``n``;
* a reachability part: in the auxiliary connection graph every ``z`` vertex
  must be reachable from an input vertex.

Column ordering of the shared ground set is fixed as
``[I_n | lam I - A | B]``, i.e. indices ``0..n-1`` are identity columns,
``n..2n-1`` state columns and ``2n..2n+m-1`` input columns.
"""

import itertools
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .model import PatternMatrix, pbh_matrix
from .numerics import (
    EIG_TOL,
    RANK_TOL,
    bipartite_matching,
    distinct_eigenvalues,
    eigenvalues,
    max_bipartite_matching,
    rank_abs,
    singular_values,
)

SPARSITY_THRESHOLD = 1e-9
LEMMA2_MAX_DIM = 12


@dataclass(frozen=True)
class Acg:
    """Auxiliary connection graph.

    Edges are stored with 0-based indices:

    ``edges_xz``
        ``(j, i)`` for ``x_j -> z_i``;
    ``edges_uz``
        ``(j, i)`` for ``u_j -> z_i``;
    ``edges_zx``
        ``(i, j)`` for ``z_i -> x_j``, present iff ``P[j, i]`` is free.
    """

    n: int
    m: int
    edges_xz: frozenset
    edges_uz: frozenset
    edges_zx: frozenset


@dataclass(frozen=True)
class MixedRankCertificate:
    eigenvalue: complex
    common_independent_set: frozenset
    cardinality: int


def _spectral_radius(a):
    if a.shape[0] == 0:
        return 0.0
    return float(np.max(np.abs(eigenvalues(a))))


def transfer_sparsity(sys, n_samples=3, seed=0):
    """Zero patterns of ``G_zx = [(lam I - A)^-1; 0]`` and ``G_zu = [(lam I - A)^-1 B; I_m]``.

    Each entry is a rational function of ``lam``; it is declared nonzero when
    its modulus exceeds ``1e-9`` at any of `n_samples` random complex points
    kept at least ``0.1 (1 + rho(A))`` away from the spectrum.
    """
    if n_samples < 3:
        raise ValueError("n_samples must be >= 3")
    n, m = sys.n, sys.m
    eigs = eigenvalues(sys.A)
    radius = 1.0 + _spectral_radius(sys.A)
    rng = np.random.default_rng(seed)
    points = []
    while len(points) < n_samples:
        z = complex(rng.uniform(-radius, radius), rng.uniform(-radius, radius))
        if n == 0 or np.min(np.abs(eigs - z)) >= 0.1 * radius:
            points.append(z)
    gzx = np.zeros((n + m, n), dtype=bool)
    gzu = np.zeros((n + m, m), dtype=bool)
    for z in points:
        res = np.linalg.solve(z * np.eye(n) - sys.A, np.eye(n)) if n else np.zeros((0, 0))
        gzx[:n] |= np.abs(res) > SPARSITY_THRESHOLD
        gzu[:n] |= np.abs(res @ sys.B) > SPARSITY_THRESHOLD
    gzu[n:] = np.eye(m, dtype=bool)
    return PatternMatrix.from_mask(gzx), PatternMatrix.from_mask(gzu)


def _check_pattern(sys, pattern):
    if pattern.shape != (sys.n, sys.n + sys.m):
        raise DimensionError(
            f"perturbation pattern must be {sys.n}x{sys.n + sys.m}, got {pattern.shape}"
        )


def build_acg(sys, pattern, sparsity=None, seed=0):
    _check_pattern(sys, pattern)
    gzx, gzu = sparsity if sparsity is not None else transfer_sparsity(sys, seed=seed)
    return Acg(
        n=sys.n,
        m=sys.m,
        edges_xz=frozenset((j, i) for i, j in gzx.support),
        edges_uz=frozenset((j, i) for i, j in gzu.support),
        edges_zx=frozenset((i, j) for j, i in pattern.support),
    )


def input_reachable(acg):
    """Vertices reachable from ``V_u`` as ``('z'|'x'|'u', index)`` tuples."""
    succ = {}
    for j, i in acg.edges_xz:
        succ.setdefault(("x", j), []).append(("z", i))
    for j, i in acg.edges_uz:
        succ.setdefault(("u", j), []).append(("z", i))
    for i, j in acg.edges_zx:
        succ.setdefault(("z", i), []).append(("x", j))
    seen = {("u", j) for j in range(acg.m)}
    queue = deque(seen)
    while queue:
        v = queue.popleft()
        for w in succ.get(v, ()):
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def count_input_reachable(acg):
    """Number of ``z`` vertices with a directed path from some input vertex."""
    return sum(1 for kind, _ in input_reachable(acg) if kind == "z")


def xz_edges_input_reachable(acg):
    """True iff every ``x -> z`` edge has an input-reachable endpoint."""
    seen = input_reachable(acg)
    return all(("x", j) in seen or ("z", i) in seen for j, i in acg.edges_xz)


def acg_to_dot(acg, name="acg"):
    """Render the graph in DOT; edge classes are carried in a ``class`` attribute."""
    lines = [f"digraph {name} {{", "  rankdir=LR;"]
    for i in range(acg.n + acg.m):
        lines.append(f'  z{i + 1} [shape=circle, group="z"];')
    for j in range(acg.n):
        lines.append(f'  x{j + 1} [shape=box, group="x"];')
    for j in range(acg.m):
        lines.append(f'  u{j + 1} [shape=diamond, group="u"];')
    for j, i in sorted(acg.edges_xz):
        lines.append(f'  x{j + 1} -> z{i + 1} [class="xz"];')
    for j, i in sorted(acg.edges_uz):
        lines.append(f'  u{j + 1} -> z{i + 1} [class="uz"];')
    for i, j in sorted(acg.edges_zx):
        lines.append(f'  z{i + 1} -> x{j + 1} [class="zx", color=red];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def generic_rank(pattern):
    """Generic rank of a pattern = size of a maximum row/column matching."""
    return max_bipartite_matching(sorted(pattern.support))


def matroid_intersection(ground, indep1, indep2, initial=(), target=None):
    """Maximum common independent set by shortest augmenting paths.

    Parameters
    ----------
    ground : sequence
        Ground-set elements (sortable).
    indep1, indep2 : callable
        Independence oracles taking a list of elements.
    initial : iterable
        A set independent in both matroids to start from.
    target : int, optional
        Stop as soon as the set reaches this size.
    """
    current = list(initial)
    while target is None or len(current) < target:
        path = _augmenting_path(ground, current, indep1, indep2)
        if path is None:
            break
        ins = set(path[0::2])
        outs = set(path[1::2])
        current = sorted((set(current) - outs) | ins)
    return frozenset(current)


def _augmenting_path(ground, current, indep1, indep2):
    members = set(current)
    outside = [y for y in ground if y not in members]
    sources = [y for y in outside if indep1(current + [y])]
    sinks = {y for y in outside if indep2(current + [y])}
    for y in sources:
        if y in sinks:
            return [y]
    parent = {y: None for y in sources}
    queue = deque(sources)
    while queue:
        v = queue.popleft()
        if v in members:
            # exchange x -> y when current - x + y is independent in matroid 1
            rest = [e for e in current if e != v]
            nbrs = [y for y in outside if y not in parent and indep1(rest + [y])]
        else:
            nbrs = [x for x in current if x not in parent and indep2([e for e in current if e != x] + [v])]
        for w in nbrs:
            parent[w] = v
            if w not in members and w in sinks:
                path = [w]
                while parent[path[-1]] is not None:
                    path.append(parent[path[-1]])
                return path[::-1]
            queue.append(w)
    return None


class StructuralChecker:
    """Cached structural-controllability machinery for one numeric pair.

    Spectrum, transfer-function sparsity and the numeric matroid data do not
    depend on the perturbation pattern, so they are computed once here and
    reused across the many patterns examined by the greedy and exhaustive
    searches.
    """

    def __init__(self, sys, seed=0, tol_rel=RANK_TOL, eig_tol=EIG_TOL, n_samples=3, eigs=None):
        self.sys = sys
        self.n, self.m = sys.n, sys.m
        self.tol_rel = tol_rel
        if eigs is None:
            eigs = distinct_eigenvalues(eigenvalues(sys.A), eig_tol) if sys.n else []
        self.eigs = [complex(z) for z in eigs]
        self.gzx, self.gzu = transfer_sparsity(sys, n_samples=n_samples, seed=seed)
        self._xz = {}
        for i, j in self.gzx.support:
            self._xz.setdefault(j, []).append(i)
        self._uz = {}
        for i, j in self.gzu.support:
            self._uz.setdefault(j, []).append(i)
        self._q = []
        self._thresh = []
        self._q_rank = []
        self._base = []
        n, m = self.n, self.m
        for lam in self.eigs:
            q = pbh_matrix(sys, lam)
            full = np.hstack([np.eye(n), q])
            s = singular_values(full)
            thresh = tol_rel * max(1.0, s[0] if s.size else 0.0) * max(full.shape)
            self._q.append(q)
            self._thresh.append(thresh)
            base = []
            for k in range(n + m):
                if rank_abs(q[:, base + [k]], thresh) == len(base) + 1:
                    base.append(k)
            self._q_rank.append(len(base))
            self._base.append(frozenset(n + k for k in base))

    @property
    def p(self):
        return len(self.eigs)

    def deficiencies(self):
        return [self.n - r for r in self._q_rank]

    def sparsity(self):
        return self.gzx, self.gzu

    def acg(self, pattern):
        return build_acg(self.sys, pattern, sparsity=(self.gzx, self.gzu))

    # -- reachability ----------------------------------------------------
    def reachable_z(self, pattern):
        zx = {}
        for j, i in pattern.support:
            zx.setdefault(i, []).append(j)
        seen_z = set()
        seen_x = set()
        queue = deque()
        for u in range(self.m):
            for i in self._uz.get(u, ()):
                if i not in seen_z:
                    seen_z.add(i)
                    queue.append(i)
        while queue:
            i = queue.popleft()
            for j in zx.get(i, ()):
                if j in seen_x:
                    continue
                seen_x.add(j)
                for i2 in self._xz.get(j, ()):
                    if i2 not in seen_z:
                        seen_z.add(i2)
                        queue.append(i2)
        return seen_z

    def g2(self, pattern):
        return len(self.reachable_z(pattern))

    # -- mixed rank ------------------------------------------------------
    def _oracles(self, k, pattern):
        n = self.n
        q = self._q[k]
        thresh = self._thresh[k]
        rows = {}
        for r, c in pattern.support:
            rows.setdefault(r, []).append(c)

        def indep1(cols):
            if len(cols) > n:
                return False
            ident = {c for c in cols if c < n}
            qcols = [c - n for c in cols if c >= n]
            if not qcols:
                return True
            keep = [r for r in range(n) if r not in ident]
            if len(qcols) > len(keep):
                return False
            return rank_abs(q[np.ix_(keep, qcols)], thresh) == len(qcols)

        def indep2(cols):
            adj = {c: (rows.get(c, ()) if c < n else (c - n,)) for c in cols}
            if any(len(v) == 0 for v in adj.values()):
                return False
            return len(bipartite_matching(adj)) == len(cols)

        return indep1, indep2

    def mixed_rank(self, k, pattern, initial=None, target=None):
        """Matroid-intersection cardinality at the k-th distinct eigenvalue."""
        _check_pattern(self.sys, pattern)
        indep1, indep2 = self._oracles(k, pattern)
        start = self._base[k] if initial is None else initial
        ground = list(range(2 * self.n + self.m))
        best = matroid_intersection(ground, indep1, indep2, sorted(start), target=target)
        return MixedRankCertificate(self.eigs[k], best, len(best))

    def _rank_upper_bound(self, k, pattern):
        # rows untouched by the pattern keep their numeric rank
        touched = {r for r, _ in pattern.support}
        keep = [r for r in range(self.n) if r not in touched]
        return rank_abs(self._q[k][keep, :], self._thresh[k]) + len(touched)

    def rank_condition(self, pattern):
        grank = None
        order = sorted(range(self.p), key=lambda k: self._q_rank[k])
        for k in order:
            if self._q_rank[k] == self.n:
                continue
            if grank is None:
                grank = generic_rank(pattern)
            if self._q_rank[k] + grank < self.n or self._rank_upper_bound(k, pattern) < self.n:
                return False
            if self.mixed_rank(k, pattern, target=self.n).cardinality < self.n:
                return False
        return True

    def is_structurally_controllable(self, pattern):
        _check_pattern(self.sys, pattern)
        if self.g2(pattern) < self.n + self.m:
            return False
        return self.rank_condition(pattern)


def max_structured_rank(lam, sys, pattern, tol_rel=RANK_TOL):
    """Max over realizations of ``rank [lam I - A - dA, B + dB]`` via matroid intersection."""
    _check_pattern(sys, pattern)
    n, m = sys.n, sys.m
    q = pbh_matrix(sys, lam)
    full = np.hstack([np.eye(n), q])
    s = singular_values(full)
    thresh = tol_rel * max(1.0, s[0] if s.size else 0.0) * max(full.shape)
    rows = {}
    for r, c in pattern.support:
        rows.setdefault(r, []).append(c)

    def indep1(cols):
        return len(cols) <= n and rank_abs(full[:, cols], thresh) == len(cols)

    def indep2(cols):
        adj = {c: (rows.get(c, ()) if c < n else (c - n,)) for c in cols}
        if any(len(v) == 0 for v in adj.values()):
            return False
        return len(bipartite_matching(adj)) == len(cols)

    best = matroid_intersection(list(range(2 * n + m)), indep1, indep2)
    return MixedRankCertificate(complex(lam), best, len(best))


def lemma2_max_rank(lam, sys, pattern, tol_rel=RANK_TOL):
    """Brute-force max rank of ``[lam I - A, B] + P`` over row/column splits.

    Maximizes ``rank Q[I, J] + grank P[I^c, J^c]`` over ``|I| = |J|``; the
    cost is exponential, so ``n + m`` is capped at 12.
    """
    _check_pattern(sys, pattern)
    n, m = sys.n, sys.m
    if n + m > LEMMA2_MAX_DIM:
        raise DimensionError(f"lemma2_max_rank limited to n + m <= {LEMMA2_MAX_DIM}")
    q = pbh_matrix(sys, lam)
    full = np.hstack([np.eye(n), q])
    s = singular_values(full)
    thresh = tol_rel * max(1.0, s[0] if s.size else 0.0) * max(full.shape)
    all_rows = range(n)
    all_cols = range(n + m)
    best = 0
    for size in range(0, n + 1):
        for rows in itertools.combinations(all_rows, size):
            rest_r = [r for r in all_rows if r not in rows]
            for cols in itertools.combinations(all_cols, size):
                const = rank_abs(q[np.ix_(rows, cols)], thresh) if size else 0
                if const + min(len(rest_r), n + m - size) <= best:
                    continue
                rest_c = [c for c in all_cols if c not in cols]
                val = const + generic_rank(pattern.submatrix(rest_r, rest_c))
                best = max(best, val)
                if best == n:
                    return best
    return best


def is_structurally_controllable(sys, pattern, seed=0, tol_rel=RANK_TOL):
    return StructuralChecker(sys, seed=seed, tol_rel=tol_rel).is_structurally_controllable(pattern)
