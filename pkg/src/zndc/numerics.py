"""Dense linear-algebra helpers and a bipartite matching kernel.

Everything here is a pure function of its inputs.  Eigenvalues and singular
values come from LAPACK through numpy; the matching routine is a plain
Hopcroft-Karp implementation working on edge lists.
"""

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NumericalError

RANK_TOL = 1e-10
EIG_TOL = 1e-8


@dataclass(frozen=True)
class SvdResult:
    """Full singular value decomposition ``M = U diag(s) V^H``.

    Attributes
    ----------
    singular_values : ndarray
        Nonincreasing, nonnegative; length ``min(M.shape)``.
    left_vectors : ndarray
        ``U`` with orthonormal columns, shape ``(n_rows, n_rows)``.
    right_vectors : ndarray
        ``V`` (not ``V^H``) with orthonormal columns, shape ``(n_cols, n_cols)``.
    """

    singular_values: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray

    def reconstruct(self):
        u, v, s = self.left_vectors, self.right_vectors, self.singular_values
        k = s.size
        return (u[:, :k] * s) @ v[:, :k].conj().T


def as_matrix(m, dtype=float):
    """Return `m` as a finite 2-D array, raising on NaN/Inf."""
    arr = np.asarray(m, dtype=dtype)
    if arr.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {arr.shape}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise NumericalError("matrix has non-finite entries")
    return arr


def eigenvalues(a):
    """Eigenvalues of a real square matrix, with multiplicity."""
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"eigenvalues need a square matrix, got {a.shape}")
    if a.shape[0] == 0:
        return np.zeros(0, dtype=complex)
    try:
        return np.linalg.eigvals(a).astype(complex)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(str(exc)) from exc


def distinct_eigenvalues(eigs, tol=EIG_TOL):
    """Cluster eigenvalues and keep one representative per cluster.

    Eigenvalues within absolute distance `tol` of each other are merged
    (single linkage) and replaced by the cluster mean.  For real matrices the
    spectrum is closed under conjugation, and rank conditions at ``lam`` and
    ``conj(lam)`` coincide, so only the member with nonnegative imaginary
    part is kept.

    Returns
    -------
    list of complex
        Sorted by (real part, imaginary part).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    vals = [complex(v) for v in np.asarray(eigs, dtype=complex).ravel()]
    clusters = []
    for v in sorted(vals, key=lambda z: (z.real, z.imag)):
        hit = [c for c in clusters if min(abs(v - w) for w in c) <= tol]
        if not hit:
            clusters.append([v])
            continue
        merged = [v]
        for c in hit:
            merged.extend(c)
            clusters.remove(c)
        clusters.append(merged)
    reps = []
    for c in clusters:
        z = complex(np.mean(c))
        if abs(z.imag) <= tol:
            z = complex(z.real, 0.0)
        reps.append(z)
    kept = []
    for z in reps:
        if z.imag < 0:
            mirror = z.conjugate()
            if any(abs(mirror - w) <= tol for w in reps):
                continue
            z = mirror
        if not any(abs(z - w) <= tol for w in kept):
            kept.append(z)
    return sorted(kept, key=lambda z: (z.real, z.imag))


def singular_values(m):
    m = np.asarray(m)
    if m.size == 0:
        return np.zeros(0)
    try:
        return np.linalg.svd(m, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(str(exc)) from exc


def numerical_rank(m, tol_rel=RANK_TOL):
    """Number of singular values above ``tol_rel * s_max * max(shape)``.

    Empty and all-zero matrices have rank 0.
    """
    if tol_rel <= 0:
        raise ValueError("tol_rel must be positive")
    m = np.asarray(m)
    if m.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {m.shape}")
    s = singular_values(m)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol_rel * s[0] * max(m.shape)))


def rank_abs(m, threshold):
    """Rank with a fixed absolute singular-value threshold."""
    m = np.asarray(m)
    if m.size == 0:
        return 0
    return int(np.sum(singular_values(m) > threshold))


def svd_full(m):
    """Full SVD with descending singular values.

    Works for real and complex input; zero-sized matrices give empty factors.
    """
    m = np.asarray(m)
    if m.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {m.shape}")
    if m.size and not np.all(np.isfinite(m)):
        raise NumericalError("matrix has non-finite entries")
    r, c = m.shape
    if m.size == 0:
        return SvdResult(np.zeros(0), np.eye(r, dtype=m.dtype), np.eye(c, dtype=m.dtype))
    try:
        u, s, vh = np.linalg.svd(m, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(str(exc)) from exc
    return SvdResult(s, u, vh.conj().T)


def ky_fan_norm(m, k):
    """Sum of the `k` largest singular values."""
    return float(np.sum(singular_values(m)[:k]))


def nuclear_norm(m):
    return float(np.sum(singular_values(m)))


def bipartite_matching(adjacency, n_left=None):
    """Maximum matching by Hopcroft-Karp.

    Parameters
    ----------
    adjacency : iterable of (left, right) pairs, or mapping left -> iterable of right
        Vertex labels are arbitrary hashables.
    n_left : ignored
        Accepted for signature symmetry with callers that know the size.

    Returns
    -------
    dict
        ``left -> right`` for every matched left vertex.
    """
    adj = {}
    if hasattr(adjacency, "items"):
        for u, vs in adjacency.items():
            adj.setdefault(u, [])
            for v in vs:
                if v not in adj[u]:
                    adj[u].append(v)
    else:
        for u, v in adjacency:
            lst = adj.setdefault(u, [])
            if v not in lst:
                lst.append(v)
    left = sorted(adj, key=repr)
    match_l = {u: None for u in left}
    match_r = {}
    inf = float("inf")

    def bfs():
        dist = {}
        q = deque()
        for u in left:
            if match_l[u] is None:
                dist[u] = 0
                q.append(u)
            else:
                dist[u] = inf
        found = False
        while q:
            u = q.popleft()
            for v in adj[u]:
                w = match_r.get(v)
                if w is None:
                    found = True
                elif dist[w] == inf:
                    dist[w] = dist[u] + 1
                    q.append(w)
        return found, dist

    def dfs(u, dist):
        for v in adj[u]:
            w = match_r.get(v)
            if w is None or (dist[w] == dist[u] + 1 and dfs(w, dist)):
                match_l[u] = v
                match_r[v] = u
                return True
        dist[u] = inf
        return False

    while True:
        found, dist = bfs()
        if not found:
            break
        for u in left:
            if match_l[u] is None:
                dfs(u, dist)
    return {u: v for u, v in match_l.items() if v is not None}


def max_bipartite_matching(adjacency):
    """Size of a maximum matching of a bipartite edge set."""
    return len(bipartite_matching(adjacency))
