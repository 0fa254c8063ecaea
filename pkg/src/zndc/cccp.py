"""Sparse controllability-restoring parameters via a difference-of-convex
program solved by the concave-convex procedure.

The zero norm of ``theta`` is replaced by the log-weighted surrogate
``sum log(1 + theta_i/tau) / log(1 + 1/tau)`` and controllability of the
shifted pair ``(A(theta) - mu I, B(theta))`` by a rank condition on

    Z = [[0, M], [N, I]],   M = [A(theta) - mu I, W, B(theta)],
                            N = [W; (A(theta) - mu I)'; B(theta)'],

whose Schur complement ``-MN`` is the Lyapunov residual.  Rank
``2n+m`` is encouraged through the gap between the nuclear norm and the
Ky Fan ``(2n+m)``-norm.  Both concave pieces are linearized at the current
iterate and each step solves one SDP.
"""

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DimensionError, NumericalError, SdpFailure
from .model import is_controllable_pbh
from .numerics import RANK_TOL, nuclear_norm, svd_full
from .sdp import Affine, SdpProblem, bmat, combination, solve_sdp

INIT_OBJECTIVES = ("constant-one", "nuclear-norm-of-W")


@dataclass
class CccpConfig:
    tau: float = 1e-5
    gamma: float = 40.0
    eta: float = 0.1
    epsilon: float = 1e-5
    xi: float = 1e-5
    mu_override: float = None
    max_outer_iter: int = 200
    init_objective: str = "constant-one"
    support_threshold_factor: float = 0.1
    init_jitter: float = 1e-3
    feas_tol: float = 1e-7
    opt_tol: float = 1e-7
    sdp_max_iter: int = 5000

    @property
    def descent_slack(self):
        return 10 * self.feas_tol

    def validate(self):
        for name in ("tau", "gamma", "epsilon", "xi", "support_threshold_factor", "feas_tol", "opt_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.eta < 1:
            raise ValueError("eta must lie in (0, 1)")
        if self.max_outer_iter < 0:
            raise ValueError("max_outer_iter must be nonnegative")
        if self.init_objective not in INIT_OBJECTIVES:
            raise ValueError(f"init_objective must be one of {INIT_OBJECTIVES}")
        if self.init_jitter < 0:
            raise ValueError("init_jitter must be nonnegative")
        if self.mu_override is not None and not self.mu_override > 0:
            raise ValueError("mu must be positive")


@dataclass
class CccpState:
    theta: np.ndarray
    W: np.ndarray
    Z: np.ndarray
    F_value: float
    iteration: int = 0
    retained: bool = False


def default_mu(affine):
    """Twice (the Gershgorin row-sum bound over the parameter box, plus one)."""
    mag = np.abs(affine.A0)
    for a, _ in affine.directions:
        mag = mag + np.abs(a)
    bound = float(mag.sum(axis=1).max()) if affine.n else 0.0
    return 2.0 * (bound + 1.0)


def build_Z(theta, W, affine, mu):
    theta = np.asarray(theta, dtype=float)
    W = np.asarray(W, dtype=float)
    n, m = affine.n, affine.m
    if theta.shape != (affine.n_params,) or W.shape != (n, n):
        raise DimensionError("theta or W does not match the affine family")
    a = affine.A_of(theta) - mu * np.eye(n)
    b = affine.B_of(theta)
    M = np.hstack([a, W, b])
    N = np.vstack([W, a.T, b.T])
    return np.block([[np.zeros((n, n)), M], [N, np.eye(2 * n + m)]])


def lyapunov_residual(theta, W, affine, mu):
    a = affine.A_of(theta) - mu * np.eye(affine.n)
    b = affine.B_of(theta)
    return a @ W + W @ a.T + b @ b.T


def weighted_l1(theta, tau):
    theta = np.asarray(theta, dtype=float)
    return float(np.sum(np.log1p(np.abs(theta) / tau)) / np.log1p(1.0 / tau))


def nuclear_gap(Z, r):
    """Sum of the singular values beyond the largest `r`."""
    s = np.linalg.svd(np.asarray(Z, dtype=float), compute_uv=False)
    return float(np.sum(s[r:]))


def _infer_rank_target(Z):
    # trailing identity block has size 2n+m
    size = Z.shape[0]
    for k in range(size - 1, 0, -1):
        if np.array_equal(Z[size - k :, size - k :], np.eye(k)) and not np.any(Z[: size - k, : size - k]):
            return k
    raise DimensionError("cannot infer 2n+m from Z; pass r explicitly")


def objective_F(theta, Z, tau, gamma, r=None):
    """Weighted-l1 term plus ``gamma`` times the truncated nuclear norm."""
    if tau <= 0 or gamma <= 0:
        raise ValueError("tau and gamma must be positive")
    r = _infer_rank_target(Z) if r is None else r
    return weighted_l1(theta, tau) + gamma * nuclear_gap(Z, r)


def _mu(affine, config):
    return default_mu(affine) if config.mu_override is None else float(config.mu_override)


def _feasible_set(affine, config, mu):
    """Constraints shared by the initial and the iterated SDPs."""
    n, m, l = affine.n, affine.m, affine.n_params
    prob = SdpProblem()
    theta = prob.scalars(l)
    W = prob.symmetric(n)
    prob.add_psd(W - config.epsilon * np.eye(n))
    prob.add_ge(theta)
    prob.add_ge(1.0 - theta)
    prob.add_ge(theta.sum() - (1.0 - config.eta))
    shifted = combination(theta, [d[0] for d in affine.directions], affine.A0 - mu * np.eye(n))
    b = combination(theta, [d[1] for d in affine.directions], affine.B0)
    M = bmat([[shifted, W, b]])
    N = bmat([[W], [shifted.T], [b.T]])
    Z = bmat([[np.zeros((n, n)), M], [N, np.eye(2 * n + m)]])
    return prob, theta, W, Z


def _solve(prob, config, what, trace=None):
    sol = solve_sdp(prob, config.feas_tol, config.opt_tol, config.sdp_max_iter)
    if sol.status != "optimal":
        raise SdpFailure(f"{what}: SDP ended with status {sol.status}", status=sol.status, trace=trace)
    return sol


def _state(sol, theta, W, affine, config, mu, k):
    # interior-point values sit up to feas_tol outside the box; with a tiny
    # tau that noise would dominate the surrogate, so project back
    th = np.clip(sol.value(theta).ravel(), 0.0, 1.0)
    w = sol.value(W)
    w = (w + w.T) / 2
    z = build_Z(th, w, affine, mu)
    r = 2 * affine.n + affine.m
    return CccpState(th, w, z, objective_F(th, z, config.tau, config.gamma, r), k)


def initialize(affine, config=None, seed=0):
    """Feasible starting point from a convex program over ``(theta, W)``.

    With ``init_objective = "nuclear-norm-of-W"`` the trace of ``W`` (its
    nuclear norm, ``W`` being PSD) is minimized instead of a constant.

    The solver's answer is the central point of the parameter box, which is
    as symmetric as the network; the procedure would keep that symmetry
    forever.  A seeded relative jitter of size ``init_jitter`` is applied to
    ``theta`` afterwards.  The constraints on ``theta`` do not involve
    ``W``, so the jittered point stays feasible after clipping to the box.
    """
    config = config or CccpConfig()
    config.validate()
    mu = _mu(affine, config)
    prob, theta, W, _ = _feasible_set(affine, config, mu)
    if config.init_objective == "nuclear-norm-of-W":
        prob.minimize(W.trace())
    sol = _solve(prob, config, "initialization")
    state = _state(sol, theta, W, affine, config, mu, 0)
    if config.init_jitter > 0 and affine.n_params:
        rng = np.random.default_rng(seed)
        th = state.theta * (1.0 + config.init_jitter * rng.uniform(-1.0, 1.0, affine.n_params))
        th = np.clip(th, 0.0, 1.0)
        if th.sum() < 1.0 - config.eta:
            th = state.theta
        z = build_Z(th, state.W, affine, mu)
        state = CccpState(th, state.W, z, objective_F(th, z, config.tau, config.gamma, 2 * affine.n + affine.m), 0)
    return state


def l1_weights(theta, tau):
    """Gradient of the weighted-l1 surrogate at `theta`."""
    return (1.0 / tau) / (np.log1p(1.0 / tau) * (1.0 + np.asarray(theta) / tau))


def kyfan_subgradient(Z, r):
    """``U1 V1'`` from the top `r` singular triplets."""
    svd = svd_full(Z)
    return svd.left_vectors[:, :r] @ svd.right_vectors[:, :r].T


def surrogate(candidate, expansion, config):
    """Convex majorizer built at `expansion`, evaluated at `candidate` (constants dropped)."""
    n = len(expansion.W)
    r = expansion.Z.shape[0] - n
    w = l1_weights(expansion.theta, config.tau)
    g = kyfan_subgradient(expansion.Z, r)
    return config.gamma * (nuclear_norm(candidate.Z) - np.sum(g * candidate.Z)) + float(w @ candidate.theta)


def build_subproblem(state, affine, config=None):
    """The SDP solved by one step, expanded at `state`.

    Returns ``(problem, theta_expr, W_expr)``.
    """
    config = config or CccpConfig()
    mu = _mu(affine, config)
    n, m = affine.n, affine.m
    r = 2 * n + m
    size = 3 * n + m
    prob, theta, W, Z = _feasible_set(affine, config, mu)
    W1 = prob.symmetric(size)
    W2 = prob.symmetric(size)
    prob.add_psd(bmat([[W1, Z], [Z.T, W2]]))
    w = l1_weights(state.theta, config.tau)
    obj = 0.5 * config.gamma * (W1.trace() + W2.trace())
    obj = obj + theta.T @ w.reshape(-1, 1)
    obj = obj - config.gamma * Z.inner(kyfan_subgradient(state.Z, r))
    prob.minimize(obj)
    return prob, theta, W


def cccp_iterate(state, affine, config=None, trace=None):
    """One convexified step; returns the next state.

    The current point is itself feasible for the step's SDP.  If the
    solver's answer scores worse on the majorizer than staying put (it can,
    by a few 1e-5, since the nuclear-norm terms cancel from ~1e3 down to
    ~1e-1), the current point is kept and flagged ``retained``.
    """
    config = config or CccpConfig()
    mu = _mu(affine, config)
    prob, theta, W = build_subproblem(state, affine, config)
    sol = _solve(prob, config, f"iteration {state.iteration + 1}", trace)
    nxt = _state(sol, theta, W, affine, config, mu, state.iteration + 1)
    if surrogate(nxt, state, config) > surrogate(state, state, config):
        return replace(state, iteration=state.iteration + 1, retained=True)
    return nxt


@dataclass
class CccpResult:
    theta: np.ndarray
    support: tuple
    trace: list
    feasible: bool
    converged: bool = False
    states: list = field(default_factory=list, repr=False)
    tau: float = 1e-5
    gamma: float = 40.0
    mu: float = None

    def __iter__(self):
        return iter((self.theta, self.support, self.trace, self.feasible))

    def trace_rows(self):
        for st in self.states:
            n = len(st.W)
            r = st.Z.shape[0] - n
            yield st.iteration, st.F_value, weighted_l1(st.theta, self.tau), nuclear_gap(st.Z, r), st.theta

    def to_csv(self, path_or_file):
        """Columns ``k, F, weighted_l1, nuclear_gap, theta_1..theta_l``."""
        own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
        fh = open(path_or_file, "w", newline="") if own else path_or_file
        try:
            w = csv.writer(fh)
            w.writerow(["k", "F", "weighted_l1", "nuclear_gap"] + [f"theta_{i + 1}" for i in range(len(self.theta))])
            for k, f, wl1, gap, th in self.trace_rows():
                w.writerow([k, repr(f), repr(wl1), repr(gap)] + [repr(float(t)) for t in th])
        finally:
            if own:
                fh.close()


def extract_support(theta, config, l=None):
    l = len(theta) if l is None else l
    cut = config.support_threshold_factor * (1.0 - config.eta) / l
    return tuple(int(i) for i in np.flatnonzero(np.asarray(theta) > cut))


def run_cccp(affine, config=None, seed=0, tol_rel=RANK_TOL, callback=None):
    """Iterate until ``||theta_k - theta_{k-1}||_2 <= xi`` or the budget runs out.

    `seed` drives the symmetry-breaking jitter of the starting point (see
    :func:`initialize`); the rest is deterministic.  Each iterate is checked for the stability of
    ``A(theta) - mu I``.  An SDP failure raises :class:`SdpFailure`
    carrying the partial F trace.
    """
    config = config or CccpConfig()
    config.validate()
    mu = _mu(affine, config)
    state = initialize(affine, config, seed)
    states = [state]
    converged = False
    while state.iteration < config.max_outer_iter:
        _check_stable(affine, state.theta, mu)
        nxt = cccp_iterate(state, affine, config, trace=[s.F_value for s in states])
        states.append(nxt)
        if callback is not None:
            callback(nxt)
        step = float(np.linalg.norm(nxt.theta - state.theta))
        state = nxt
        if step <= config.xi:
            converged = True
            break
    _check_stable(affine, state.theta, mu)
    theta = np.clip(state.theta, 0.0, 1.0)
    support = extract_support(theta, config)
    feasible = is_controllable_pbh(affine.evaluate(theta), tol_rel)
    return CccpResult(
        theta=theta,
        support=support,
        trace=[s.F_value for s in states],
        feasible=feasible,
        converged=converged,
        states=states,
        tau=config.tau,
        gamma=config.gamma,
        mu=mu,
    )


def _check_stable(affine, theta, mu):
    eig = np.linalg.eigvals(affine.A_of(theta) - mu * np.eye(affine.n))
    if eig.size and np.max(eig.real) >= 0:
        raise NumericalError("A(theta) - mu I is not Hurwitz; increase mu")

