"""System representations and numerical controllability tests."""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError
from .numerics import (
    EIG_TOL,
    RANK_TOL,
    as_matrix,
    distinct_eigenvalues,
    eigenvalues,
    numerical_rank,
)


@dataclass(frozen=True, eq=False)
class LinearSystem:
    """Continuous-time pair ``(A, B)`` for ``x' = A x + B u``."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        a = as_matrix(self.A)
        b = np.asarray(self.B, dtype=float)
        if a.shape[0] != a.shape[1]:
            raise DimensionError(f"A must be square, got {a.shape}")
        n = a.shape[0]
        if b.size == 0:
            b = np.zeros((n, 0))
        b = as_matrix(b)
        if b.shape[0] != n:
            raise DimensionError(f"B must have {n} rows, got {b.shape}")
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "B", b)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.B.shape[1]

    def __eq__(self, other):
        if not isinstance(other, LinearSystem):
            return NotImplemented
        return np.array_equal(self.A, other.A) and np.array_equal(self.B, other.B)

    def perturbed(self, delta):
        """Return ``(A + dA, B + dB)`` where ``delta = [dA, dB]``."""
        delta = np.asarray(delta, dtype=float)
        if delta.shape != (self.n, self.n + self.m):
            raise DimensionError(f"perturbation must be {self.n}x{self.n + self.m}")
        return LinearSystem(self.A + delta[:, : self.n], self.B + delta[:, self.n :])

    def __repr__(self):
        return f"LinearSystem(n={self.n}, m={self.m})"


@dataclass(frozen=True)
class PatternMatrix:
    """A {0,*} pattern stored as the set of its ``*`` positions (0-based)."""

    n_rows: int
    n_cols: int
    support: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        supp = frozenset((int(r), int(c)) for r, c in self.support)
        for r, c in supp:
            if not (0 <= r < self.n_rows and 0 <= c < self.n_cols):
                raise DimensionError(
                    f"entry ({r}, {c}) outside a {self.n_rows}x{self.n_cols} pattern"
                )
        object.__setattr__(self, "support", supp)

    @classmethod
    def from_mask(cls, mask):
        mask = np.asarray(mask)
        if mask.ndim != 2:
            raise DimensionError("pattern mask must be 2-D")
        rows, cols = np.nonzero(mask)
        return cls(mask.shape[0], mask.shape[1], frozenset(zip(rows.tolist(), cols.tolist())))

    @classmethod
    def full(cls, n_rows, n_cols):
        return cls(n_rows, n_cols, frozenset((r, c) for r in range(n_rows) for c in range(n_cols)))

    @classmethod
    def diagonal(cls, k, n_rows=None, n_cols=None):
        """``Ī_k`` placed at the top-left of an optional larger zero pattern."""
        n_rows = k if n_rows is None else n_rows
        n_cols = k if n_cols is None else n_cols
        return cls(n_rows, n_cols, frozenset((i, i) for i in range(k)))

    @property
    def shape(self):
        return (self.n_rows, self.n_cols)

    def to_mask(self):
        mask = np.zeros(self.shape, dtype=bool)
        for r, c in self.support:
            mask[r, c] = True
        return mask

    def with_entries(self, entries):
        return PatternMatrix(self.n_rows, self.n_cols, self.support | frozenset(entries))

    def transpose(self):
        return PatternMatrix(self.n_cols, self.n_rows, frozenset((c, r) for r, c in self.support))

    def submatrix(self, rows, cols):
        rmap = {r: i for i, r in enumerate(rows)}
        cmap = {c: j for j, c in enumerate(cols)}
        supp = frozenset(
            (rmap[r], cmap[c]) for r, c in self.support if r in rmap and c in cmap
        )
        return PatternMatrix(len(rmap), len(cmap), supp)

    def sorted_entries(self):
        return sorted(self.support)

    def __len__(self):
        return len(self.support)

    def __contains__(self, entry):
        return tuple(entry) in self.support

    def issubset(self, other):
        return self.shape == other.shape and self.support <= other.support


@dataclass(frozen=True, eq=False)
class AffineSystem:
    """Nominal pair plus perturbation directions, ``A(t) = A0 + sum t_i A_i``."""

    A0: np.ndarray
    B0: np.ndarray
    directions: tuple = ()

    def __post_init__(self):
        nominal = LinearSystem(self.A0, self.B0)
        n, m = nominal.n, nominal.m
        dirs = []
        for i, (ai, bi) in enumerate(self.directions):
            ai = as_matrix(ai)
            bi = np.asarray(bi, dtype=float)
            if bi.size == 0:
                bi = np.zeros((n, m))
            bi = as_matrix(bi)
            if ai.shape != (n, n) or bi.shape != (n, m):
                raise DimensionError(
                    f"direction {i} has shapes {ai.shape}, {bi.shape}; expected "
                    f"{(n, n)}, {(n, m)}"
                )
            dirs.append((ai, bi))
        object.__setattr__(self, "A0", nominal.A)
        object.__setattr__(self, "B0", nominal.B)
        object.__setattr__(self, "directions", tuple(dirs))

    @property
    def n(self):
        return self.A0.shape[0]

    @property
    def m(self):
        return self.B0.shape[1]

    @property
    def n_params(self):
        return len(self.directions)

    def A_of(self, theta):
        theta = self._theta(theta)
        a = self.A0.copy()
        for t, (ai, _) in zip(theta, self.directions):
            a = a + t * ai
        return a

    def B_of(self, theta):
        theta = self._theta(theta)
        b = self.B0.copy()
        for t, (_, bi) in zip(theta, self.directions):
            b = b + t * bi
        return b

    def evaluate(self, theta):
        return LinearSystem(self.A_of(theta), self.B_of(theta))

    @property
    def nominal(self):
        return LinearSystem(self.A0, self.B0)

    def _theta(self, theta):
        theta = np.asarray(theta, dtype=float).ravel()
        if theta.size != self.n_params:
            raise DimensionError(f"theta must have {self.n_params} entries, got {theta.size}")
        return theta

    def __eq__(self, other):
        if not isinstance(other, AffineSystem):
            return NotImplemented
        return (
            np.array_equal(self.A0, other.A0)
            and np.array_equal(self.B0, other.B0)
            and len(self.directions) == len(other.directions)
            and all(
                np.array_equal(a, c) and np.array_equal(b, d)
                for (a, b), (c, d) in zip(self.directions, other.directions)
            )
        )


def pbh_matrix(sys, lam):
    """``[lam I - A, B]`` as a complex matrix."""
    n = sys.n
    return np.hstack([lam * np.eye(n) - sys.A, sys.B]).astype(complex)


def is_controllable_pbh(sys, tol_rel=RANK_TOL, eig_tol=EIG_TOL):
    """PBH test over the distinct eigenvalues of ``A``."""
    if sys.n == 0:
        return True
    for lam in distinct_eigenvalues(eigenvalues(sys.A), eig_tol):
        if numerical_rank(pbh_matrix(sys, lam), tol_rel) < sys.n:
            return False
    return True


def controllability_matrix(sys):
    """``[B, AB, ..., A^(n-1) B]``."""
    blocks = []
    blk = sys.B
    for _ in range(sys.n):
        blocks.append(blk)
        blk = sys.A @ blk
    if not blocks:
        return np.zeros((0, 0))
    return np.hstack(blocks)


def controllability_matrix_rank(sys, tol_rel=RANK_TOL):
    return numerical_rank(controllability_matrix(sys), tol_rel)


def realize_pattern(pattern, seed=0, magnitude_range=(0.5, 1.5)):
    """Random matrix supported exactly on `pattern`.

    Nonzeros are drawn i.i.d. with magnitude uniform on `magnitude_range` and a
    random sign; entries are visited in sorted order so the result depends only
    on the pattern and the seed.
    """
    lo, hi = magnitude_range
    if lo <= 0 or hi < lo:
        raise ValueError("magnitude_range must satisfy 0 < low <= high")
    rng = np.random.default_rng(seed)
    out = np.zeros(pattern.shape)
    entries = pattern.sorted_entries()
    if entries:
        mags = rng.uniform(lo, hi, size=len(entries))
        signs = rng.choice([-1.0, 1.0], size=len(entries))
        for (r, c), v in zip(entries, mags * signs):
            out[r, c] = v
    return out


def verify_feasibility(sys, pattern, trials=5, seed=0, tol_rel=RANK_TOL):
    """True if some random realization of `pattern` makes the system controllable."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if pattern.shape != (sys.n, sys.n + sys.m):
        raise DimensionError(f"pattern must be {sys.n}x{sys.n + sys.m}")
    seeds = np.random.SeedSequence(seed).spawn(trials)
    for ss in seeds:
        delta = realize_pattern(pattern, np.random.default_rng(ss))
        if is_controllable_pbh(sys.perturbed(delta), tol_rel):
            return True
    return False
