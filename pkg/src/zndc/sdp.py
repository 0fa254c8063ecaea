"""Small dense/sparse semidefinite programs.

Problems are built from affine expressions over a flat variable vector:

>>> prob = SdpProblem()
>>> t = prob.scalars(1)
>>> prob.add_psd(bmat([[t, 1.0], [1.0, t]]))
>>> prob.minimize(t)
>>> round(solve_sdp(prob).objective, 6)
1.0

Symmetric blocks are stored through the isometric ``svec`` map (upper
triangle column by column, off-diagonals scaled by ``sqrt 2``), which is
also the layout the interior-point backend (Clarabel) expects for its PSD
cone.  Status and residuals are recomputed here from the returned point
rather than trusted from the backend.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError

STATUSES = ("optimal", "infeasible", "max_iter", "numerical_failure")
SQRT2 = np.sqrt(2.0)


def _as_const(value):
    a = np.asarray(value, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2:
        raise DimensionError("constants must be scalars, vectors or matrices")
    return a


def _widen(lin, n_vars):
    """Pad a CSR map with zero columns up to `n_vars`."""
    lin = lin.tocsr()
    if lin.shape[1] == n_vars:
        return lin
    return sp.csr_matrix((lin.data, lin.indices, lin.indptr), shape=(lin.shape[0], n_vars))


class Affine:
    """Matrix-valued affine map ``x -> reshape(lin @ x) + const`` (row-major)."""

    __array_priority__ = 100

    def __init__(self, lin, const):
        const = _as_const(const)
        if lin.shape[0] != const.size:
            raise DimensionError("linear part and constant disagree in size")
        self.lin = lin.tocsr()
        self.const = const

    @classmethod
    def constant(cls, value):
        c = _as_const(value)
        return cls(sp.csr_matrix((c.size, 0)), c)

    @property
    def shape(self):
        return self.const.shape

    @property
    def n_vars(self):
        return self.lin.shape[1]

    def __add__(self, other):
        other = _lift(other)
        if self.shape == (1, 1) and self.n_vars == 0 and other.shape != (1, 1):
            return other + self
        if other.shape != self.shape:
            if other.shape == (1, 1) and other.n_vars == 0:
                other = Affine.constant(np.full(self.shape, other.const[0, 0]))
            else:
                raise DimensionError(f"cannot add shapes {self.shape} and {other.shape}")
        nv = max(self.n_vars, other.n_vars)
        return Affine(_widen(self.lin, nv) + _widen(other.lin, nv), self.const + other.const)

    __radd__ = __add__

    def __neg__(self):
        return Affine(-self.lin, -self.const)

    def __sub__(self, other):
        return self + (-_lift(other))

    def __rsub__(self, other):
        return _lift(other) - self

    def __mul__(self, k):
        k = float(k)
        return Affine(self.lin * k, self.const * k)

    __rmul__ = __mul__

    def __matmul__(self, d):
        d = _as_const(d)
        r, c = self.shape
        if d.shape[0] != c:
            raise DimensionError(f"cannot multiply {self.shape} by {d.shape}")
        op = sp.kron(sp.identity(r), sp.csr_matrix(d.T), format="csr")
        return Affine(op @ self.lin, self.const @ d)

    def __rmatmul__(self, d):
        d = _as_const(d)
        r, c = self.shape
        if d.shape[1] != r:
            raise DimensionError(f"cannot multiply {d.shape} by {self.shape}")
        op = sp.kron(sp.csr_matrix(d), sp.identity(c), format="csr")
        return Affine(op @ self.lin, d @ self.const)

    @property
    def T(self):
        r, c = self.shape
        idx = np.arange(r * c).reshape(r, c).T.ravel()
        return Affine(self.lin[idx], self.const.T)

    def __getitem__(self, key):
        r, c = self.shape
        idx = np.asarray(np.arange(r * c).reshape(r, c)[key])
        if idx.ndim < 2:
            idx = idx.reshape(-1, 1)
        return Affine(self.lin[idx.ravel()], self.const.ravel()[idx.ravel()].reshape(idx.shape))

    def sum(self):
        return Affine(sp.csr_matrix(self.lin.sum(axis=0)), self.const.sum())

    def trace(self):
        r, c = self.shape
        if r != c:
            raise DimensionError("trace of a non-square expression")
        return self[np.arange(r), np.arange(r)].sum()

    def inner(self, d):
        """``<D, X> = sum_ij D_ij X_ij``."""
        d = _as_const(d)
        if d.shape != self.shape:
            raise DimensionError("inner product of mismatched shapes")
        w = d.ravel()
        return Affine(sp.csr_matrix(w @ self.lin), float(w @ self.const.ravel()))

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return (_widen(self.lin, len(x)) @ x).reshape(self.shape) + self.const


def _lift(obj):
    return obj if isinstance(obj, Affine) else Affine.constant(obj)


def combination(coeffs, matrices, offset):
    """``offset + sum_i coeffs[i] * matrices[i]`` for a column expression `coeffs`."""
    offset = _as_const(offset)
    if coeffs.shape != (len(matrices), 1):
        raise DimensionError("one coefficient per matrix expected")
    for mat in matrices:
        if np.shape(mat) != offset.shape:
            raise DimensionError("matrices must share the offset's shape")
    if not matrices:
        return Affine.constant(offset)
    stack = sp.csr_matrix(np.column_stack([_as_const(a).ravel() for a in matrices]))
    return Affine(stack @ coeffs.lin, offset + np.tensordot(coeffs.const.ravel(), np.array(matrices), 1))


def bmat(blocks):
    """Block matrix from a grid of expressions, constants, or ``None`` (zeros)."""
    grid = [[None if b is None else _lift(b) for b in row] for row in blocks]
    heights = []
    for row in grid:
        hs = {b.shape[0] for b in row if b is not None}
        if len(hs) != 1:
            raise DimensionError("inconsistent block heights")
        heights.append(hs.pop())
    widths = []
    for j in range(len(grid[0])):
        ws = {row[j].shape[1] for row in grid if row[j] is not None}
        if len(ws) != 1:
            raise DimensionError("inconsistent block widths")
        widths.append(ws.pop())
    nv = max((b.n_vars for row in grid for b in row if b is not None), default=0)
    R, C = sum(heights), sum(widths)
    rows, cols, data = [], [], []
    const = np.zeros((R, C))
    r0 = 0
    for i, row in enumerate(grid):
        c0 = 0
        for j, b in enumerate(row):
            if b is not None:
                h, w = b.shape
                const[r0 : r0 + h, c0 : c0 + w] = b.const
                coo = b.lin.tocoo()
                bi, bj = np.divmod(coo.row, w)
                rows.append((r0 + bi) * C + c0 + bj)
                cols.append(coo.col)
                data.append(coo.data)
            c0 += widths[j]
        r0 += heights[i]
    lin = sp.csr_matrix(
        (np.concatenate(data) if data else [], (np.concatenate(rows) if rows else [], np.concatenate(cols) if cols else [])),
        shape=(R * C, nv),
    )
    return Affine(lin, const)


def svec_operator(k):
    """Sparse map from row-major ``vec(X)`` (``k*k``) to ``svec(sym X)``."""
    rows, cols, vals = [], [], []
    t = 0
    for j in range(k):
        for i in range(j + 1):
            if i == j:
                rows.append(t)
                cols.append(i * k + j)
                vals.append(1.0)
            else:
                rows += [t, t]
                cols += [i * k + j, j * k + i]
                vals += [SQRT2 / 2, SQRT2 / 2]
            t += 1
    return sp.csr_matrix((vals, (rows, cols)), shape=(k * (k + 1) // 2, k * k))


def smat(v, k):
    """Inverse of ``svec`` for a vector of length ``k(k+1)/2``."""
    x = np.zeros((k, k))
    t = 0
    for j in range(k):
        for i in range(j + 1):
            x[i, j] = x[j, i] = v[t] if i == j else v[t] / SQRT2
            t += 1
    return x


class SdpProblem:
    """Linear objective, affine equalities/inequalities and LMIs."""

    def __init__(self):
        self.n_vars = 0
        self.objective = Affine.constant(0.0)
        self.equalities = []
        self.inequalities = []
        self.lmis = []

    def _new(self, count):
        start = self.n_vars
        self.n_vars += count
        return start

    def scalars(self, d):
        """``d x 1`` column of free scalar variables."""
        start = self._new(d)
        lin = sp.csr_matrix((np.ones(d), (np.arange(d), start + np.arange(d))), shape=(d, self.n_vars))
        return Affine(lin, np.zeros((d, 1)))

    def symmetric(self, k, psd=False):
        """``k x k`` symmetric variable block, optionally constrained PSD."""
        nt = k * (k + 1) // 2
        start = self._new(nt)
        rows, cols, vals = [], [], []
        t = 0
        for j in range(k):
            for i in range(j + 1):
                w = 1.0 if i == j else 1.0 / SQRT2
                for a, b in {(i, j), (j, i)}:
                    rows.append(a * k + b)
                    cols.append(start + t)
                    vals.append(w)
                t += 1
        expr = Affine(sp.csr_matrix((vals, (rows, cols)), shape=(k * k, self.n_vars)), np.zeros((k, k)))
        if psd:
            self.add_psd(expr)
        return expr

    def minimize(self, expr):
        expr = _lift(expr)
        if expr.shape != (1, 1):
            raise DimensionError("objective must be scalar")
        if not np.all(np.isfinite(expr.const)) or not np.all(np.isfinite(expr.lin.data)):
            raise ValueError("objective must be finite")
        self.objective = expr

    def add_eq(self, expr):
        """``expr == 0`` componentwise."""
        self.equalities.append(_lift(expr))

    def add_ge(self, expr):
        """``expr >= 0`` componentwise."""
        self.inequalities.append(_lift(expr))

    def add_psd(self, expr):
        expr = _lift(expr)
        if expr.shape[0] != expr.shape[1]:
            raise DimensionError("PSD constraint on a non-square expression")
        self.lmis.append(expr)

    def conic_form(self):
        """``(q, A, b, cone_sizes, offset)`` for ``min q'x + offset, Ax + s = b``.

        ``cone_sizes`` is ``(n_eq, n_ineq, [k1, k2, ...])``.
        """
        nv = self.n_vars
        blocks, rhs = [], []
        n_eq = 0
        for e in self.equalities:
            blocks.append(_widen(e.lin, nv))
            rhs.append(-e.const.ravel())
            n_eq += e.const.size
        n_in = 0
        for g in self.inequalities:
            blocks.append(-_widen(g.lin, nv))
            rhs.append(g.const.ravel())
            n_in += g.const.size
        psd = []
        for f in self.lmis:
            k = f.shape[0]
            s = svec_operator(k)
            blocks.append(-(s @ _widen(f.lin, nv)))
            rhs.append(s @ f.const.ravel())
            psd.append(k)
        a = sp.vstack(blocks, format="csc") if blocks else sp.csc_matrix((0, nv))
        b = np.concatenate(rhs) if rhs else np.zeros(0)
        q = np.asarray(_widen(self.objective.lin, nv).todense()).ravel()
        return q, a, b, (n_eq, n_in, psd), float(self.objective.const[0, 0])

    def primal_residual(self, x):
        """Largest violation over equalities, inequalities and LMI eigenvalues."""
        res = 0.0
        for e in self.equalities:
            res = max(res, float(np.max(np.abs(e.value(x)), initial=0.0)))
        for g in self.inequalities:
            res = max(res, float(np.max(-g.value(x), initial=0.0)))
        for f in self.lmis:
            v = f.value(x)
            res = max(res, -float(np.linalg.eigvalsh((v + v.T) / 2)[0]))
        return res


@dataclass
class SdpSolution:
    values: np.ndarray
    objective: float
    status: str
    primal_residual: float
    optimality_residual: float
    iterations: int = 0

    def value(self, expr):
        return _lift(expr).value(self.values)


def solve_sdp(problem, feas_tol=1e-7, opt_tol=1e-7, max_iter=5000):
    """Solve with Clarabel and certify the result against the tolerances.

    The optimality residual is the larger of the relative duality gap and
    the relative dual-equation residual ``||A'z + q||``.  A backend
    "solved" whose certificate misses the tolerances is reported as
    ``numerical_failure``.
    """
    import clarabel

    if feas_tol <= 0 or opt_tol <= 0:
        raise ValueError("tolerances must be positive")
    q, a, b, (n_eq, n_in, psd), offset = problem.conic_form()
    nv = len(q)
    cones = []
    if n_eq:
        cones.append(clarabel.ZeroConeT(n_eq))
    if n_in:
        cones.append(clarabel.NonnegativeConeT(n_in))
    cones += [clarabel.PSDTriangleConeT(k) for k in psd]

    st = clarabel.DefaultSettings()
    st.verbose = False
    st.max_iter = int(max_iter)
    st.tol_feas = min(feas_tol, 1e-8) * 1e-1
    st.tol_gap_abs = st.tol_gap_rel = min(opt_tol, 1e-8) * 1e-1
    st.presolve_enable = False
    solver = clarabel.DefaultSolver(sp.csc_matrix((nv, nv)), q, a, b, cones, st)
    sol = solver.solve()

    x = np.asarray(sol.x, dtype=float)
    z = np.asarray(sol.z, dtype=float)
    status = str(sol.status)
    obj = float(q @ x) + offset
    if status in ("PrimalInfeasible", "AlmostPrimalInfeasible"):
        return SdpSolution(x, np.inf, "infeasible", np.inf, np.inf, sol.iterations)

    pres = problem.primal_residual(x) if np.all(np.isfinite(x)) else np.inf
    dres = float(np.max(np.abs(a.T @ z + q), initial=0.0)) / (1.0 + float(np.max(np.abs(q), initial=0.0)))
    gap = abs(float(q @ x) + float(b @ z)) / (1.0 + abs(float(q @ x)))
    ores = max(dres, gap)
    if status == "MaxIterations":
        out = "max_iter"
    elif status in ("Solved", "AlmostSolved") and pres <= feas_tol and ores <= opt_tol:
        out = "optimal"
    else:
        out = "numerical_failure"
    return SdpSolution(x, obj, out, pres, ores, sol.iterations)


# --- SDPA sparse format -----------------------------------------------------


def write_sdpa(problem, fh):
    """Dump as SDPA sparse data: ``min c'x  s.t.  sum_i F_i x_i - F_0 >= 0``.

    LMIs become dense blocks; inequalities form one diagonal block and each
    equality contributes the pair ``e >= 0, -e >= 0`` to it.  The objective
    constant survives as a comment line.
    """
    q, _, _, _, offset = problem.conic_form()
    nv = problem.n_vars
    diag = [g for g in problem.inequalities] + [s * e for e in problem.equalities for s in (1.0, -1.0)]
    sizes = [f.shape[0] for f in problem.lmis]
    n_diag = sum(g.const.size for g in diag)
    if n_diag:
        sizes.append(-n_diag)
    fh.write(f"* objective offset: {offset!r}\n")
    fh.write(f"{nv}\n{len(sizes)}\n")
    fh.write(" ".join(str(s) for s in sizes) + "\n")
    fh.write(" ".join(repr(float(v)) for v in q) + "\n")

    def entries(mat_lin, const, k, blk):
        # vec index -> (i, j); keep upper triangle after symmetrizing
        lin = _widen(mat_lin, nv).tocsc()
        out = []
        c = (const + const.T) / 2
        for i in range(k):
            for j in range(i, k):
                if c[i, j] != 0.0:
                    out.append((0, blk, i + 1, j + 1, -c[i, j]))
        for v in range(nv):
            col = np.asarray(lin[:, v].todense()).reshape(k, k)
            col = (col + col.T) / 2
            for i, j in zip(*np.nonzero(np.triu(col))):
                out.append((v + 1, blk, i + 1, j + 1, col[i, j]))
        return out

    rows = []
    for b, f in enumerate(problem.lmis, start=1):
        rows += entries(f.lin, f.const, f.shape[0], b)
    if n_diag:
        blk = len(problem.lmis) + 1
        flat = [(g.lin, g.const.ravel()) for g in diag]
        lin = sp.vstack([_widen(l_, nv) for l_, _ in flat], format="csc")
        const = np.concatenate([c for _, c in flat])
        for i, cv in enumerate(const):
            if cv != 0.0:
                rows.append((0, blk, i + 1, i + 1, -cv))
        coo = lin.tocoo()
        for i, v, d in zip(coo.row, coo.col, coo.data):
            if d != 0.0:
                rows.append((v + 1, blk, i + 1, i + 1, d))
    for r in sorted(rows):
        fh.write(f"{r[0]} {r[1]} {r[2]} {r[3]} {float(r[4])!r}\n")


def read_sdpa(fh):
    """Parse SDPA sparse data written by :func:`write_sdpa` (or by hand).

    Dense blocks become LMIs and diagonal blocks become inequalities.
    """
    offset = 0.0
    lines = []
    for raw in fh:
        s = raw.strip()
        if s.startswith("* objective offset:"):
            offset = float(s.split(":", 1)[1])
            continue
        if not s or s[0] in '*"':
            continue
        lines.append(s.replace(",", " ").replace("{", " ").replace("}", " ").replace("(", " ").replace(")", " "))
    nv = int(lines[0].split()[0])
    nb = int(lines[1].split()[0])
    sizes = [int(v) for v in lines[2].split()[:nb]]
    c = np.array([float(v) for v in lines[3].split()[:nv]])
    mats = [[np.zeros((abs(s), abs(s))) for s in sizes] for _ in range(nv + 1)]
    for s in lines[4:]:
        k, blk, i, j, v = s.split()
        mats[int(k)][int(blk) - 1][int(i) - 1, int(j) - 1] = float(v)
        mats[int(k)][int(blk) - 1][int(j) - 1, int(i) - 1] = float(v)
    prob = SdpProblem()
    x = prob.scalars(nv)
    prob.minimize(Affine.constant(offset) + x.T @ c.reshape(-1, 1))
    for b, size in enumerate(sizes):
        if size > 0:
            lin = sp.csr_matrix(np.column_stack([mats[v + 1][b].ravel() for v in range(nv)]))
            prob.add_psd(Affine(lin, -mats[0][b]))
        else:
            d = np.column_stack([np.diag(mats[v + 1][b]) for v in range(nv)])
            prob.add_ge(Affine(sp.csr_matrix(d), -np.diag(mats[0][b]).reshape(-1, 1)))
    return prob
