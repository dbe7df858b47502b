"""Directed and dynamic topology inference.

Static structural-equation fitting, per-lag sparse vector
autoregression with OR/AND edge rules, and exponentially-weighted
tracking of time-varying structural equation models.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import BadDimension, BadParameter, TooFewSamples
from .graphcore import ShiftKind, ShiftOperator
from .solvers import SolveTrace, SolverConfig, lasso_cd_gram


@dataclass(frozen=True)
class CascadeData:
    """Endogenous signals with aligned exogenous inputs.

    ``X`` is N x T (single cascade) or N x T x C. ``U`` is either shaped
    like ``X`` or N x C (per-cascade inputs, constant over time, the
    usual cascade convention); a single-cascade N x T ``U`` pairs with a
    2-D ``X``.
    """

    X: np.ndarray
    U: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        U = np.asarray(self.U, dtype=float)
        if X.ndim == 2:
            X = X[:, :, None]
            if U.ndim == 2 and U.shape == X.shape[:2]:
                U = U[:, :, None]
        if X.ndim != 3:
            raise BadDimension("X must be N x T or N x T x C")
        n, t, c = X.shape
        if U.ndim == 2 and U.shape == (n, c):
            U = np.repeat(U[:, None, :], t, axis=1)
        if U.shape != X.shape:
            raise BadDimension("exogenous inputs do not align with X")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(U))):
            raise BadParameter("cascade data must be finite")
        Xr = np.ascontiguousarray(X)
        Ur = np.ascontiguousarray(U)
        Xr.flags.writeable = False
        Ur.flags.writeable = False
        object.__setattr__(self, "X", Xr)
        object.__setattr__(self, "U", Ur)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def t(self) -> int:
        return self.X.shape[1]

    @property
    def c(self) -> int:
        return self.X.shape[2]


@dataclass
class GraphTrajectory:
    """Per-epoch estimates of a time-varying directed graph."""

    times: list = field(default_factory=list)
    weights: list = field(default_factory=list)
    edge_counts: list = field(default_factory=list)
    objectives: list = field(default_factory=list)

    def append(self, t: int, W: np.ndarray, objective: float):
        if np.abs(np.diag(W)).max(initial=0.0) != 0.0:
            raise BadParameter("tracked W must have an exactly zero diagonal")
        self.times.append(int(t))
        self.weights.append(W)
        self.edge_counts.append(int(np.count_nonzero(W)))
        self.objectives.append(float(objective))


def _node_indices(n: int, i: int):
    """Regressor layout for node i: all other signals, then its input."""
    others = np.delete(np.arange(n), i)
    return others, np.concatenate([others, [n + i]])


def _sem_grams(data: CascadeData):
    """Joint Gram of stacked [x; u] samples plus per-sample count."""
    n = data.n
    A = np.concatenate([data.X, data.U], axis=0)        # 2N x T x C
    flat = A.reshape(2 * n, -1)
    return flat @ flat.T, flat.shape[1]


def _sem_solve_nodes(G, n, lam, config, beta0=None, n_jobs: int = 1):
    """Per-node penalized regressions off a joint [x; u] Gram matrix.

    Node i regresses its own signal on the other N-1 signals plus its
    private exogenous input; the l1 penalty applies to the signal block
    only. Returns (W, omega, per-node traces)."""
    penalties = np.ones(n)
    W = np.zeros((n, n))
    omega = np.zeros(n)

    def fit(i):
        others, idx = _node_indices(n, i)
        Gi = G[np.ix_(idx, idx)]
        ri = G[idx, i]
        pw = np.concatenate([np.ones(n - 1), [0.0]])
        b0 = None if beta0 is None else beta0[i]
        beta, tr = lasso_cd_gram(Gi, ri, lam, config, penalty_weights=pw,
                                 beta0=b0, const_term=0.5 * G[i, i])
        return i, others, beta, tr

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(fit, range(n)))
    else:
        results = [fit(i) for i in range(n)]
    traces = [None] * n
    betas = [None] * n
    for i, others, beta, tr in results:
        W[i, others] = beta[:-1]
        omega[i] = beta[-1]
        traces[i] = tr
        betas[i] = beta
    return W, omega, traces, betas


def sem_fit(data: CascadeData, alpha: float,
            config: SolverConfig | None = None, n_jobs: int = 1):
    """Sparse structural-equation fit by row-decoupled penalized LS.

    Estimates W and the exogenous loadings from
    sum_t ||x_t - W x_t - Omega u_t||^2 + alpha ||W||_1 with W_ii = 0
    enforced exactly (node i never sees its own signal as a regressor)
    and the loadings unpenalized. Returns (W shift, omega, trace).
    """
    if alpha < 0:
        raise BadParameter("alpha must be nonnegative")
    config = config or SolverConfig()
    G, _ = _sem_grams(data)
    # the squared-loss criterion carries no 1/2, so the coordinate
    # descent (which minimizes 0.5 LS + lam l1) gets lam = alpha / 2
    W, omega, traces, _ = _sem_solve_nodes(G, data.n, alpha / 2.0, config,
                                           n_jobs=n_jobs)
    trace = SolveTrace(converged=all(t.converged for t in traces),
                       iters_used=max(t.iters_used for t in traces))
    trace.log(sum(t.objective[-1] for t in traces))
    return ShiftOperator(W, ShiftKind.GENERIC, directed=True), omega, trace


def svarm_fit(X, n_lags: int, lam: float, rule: str = "or",
              config: SolverConfig | None = None, n_jobs: int = 1):
    """Sparse vector autoregression with per-lag lasso penalties.

    Per node, regresses x_i[t] on the stacked lagged signals of all
    nodes; a directed edge j -> i is declared when the lag coefficients
    w_ij^(l) are nonzero for at least one lag (OR) or for every lag
    (AND). Returns (edge matrix E with E[i, j] = j influences i, list
    of per-lag weight matrices).
    """
    if rule not in ("or", "and"):
        raise BadParameter(f"unknown combination rule {rule!r}")
    X = np.asarray(X, dtype=float)
    n, t = X.shape
    if t <= n_lags + 1:
        raise TooFewSamples("series too short for the requested lag order")
    config = config or SolverConfig()
    rows = []
    for lag in range(1, n_lags + 1):
        rows.append(X[:, n_lags - lag: t - lag])
    A = np.concatenate(rows, axis=0).T          # (T - L) x (N L)
    Y = X[:, n_lags:]                           # targets
    G = A.T @ A

    def fit(i):
        r = A.T @ Y[i]
        from .solvers import lasso_cd_gram as cd
        beta, tr = cd(G, r, lam, config, const_term=0.5 * float(Y[i] @ Y[i]))
        return i, beta

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(fit, range(n)))
    else:
        results = [fit(i) for i in range(n)]
    Ws = [np.zeros((n, n)) for _ in range(n_lags)]
    for i, beta in results:
        for lag in range(n_lags):
            Ws[lag][i, :] = beta[lag * n:(lag + 1) * n]
    nz = [W != 0 for W in Ws]
    edges = nz[0]
    for mask in nz[1:]:
        edges = (edges | mask) if rule == "or" else (edges & mask)
    edges = edges.copy()
    np.fill_diagonal(edges, False)
    return edges, Ws


def dynamic_sem_track(data: CascadeData, gamma: float, alpha: float,
                      config: SolverConfig | None = None,
                      emit_every: int = 1, n_jobs: int = 1) -> GraphTrajectory:
    """Online tracking of a time-varying SEM by exponentially-weighted LS.

    At every epoch the weighted Gram and cross moments are updated
    recursively (old information discounted by ``gamma``) and the
    per-node coordinate descents restart from the previous estimate.
    With gamma = 1 the final epoch reproduces the batch fit on all the
    data.
    """
    if not (0.0 < gamma <= 1.0):
        raise BadParameter("forgetting factor must lie in (0, 1]")
    if alpha < 0:
        raise BadParameter("alpha must be nonnegative")
    config = config or SolverConfig()
    n = data.n
    G = np.zeros((2 * n, 2 * n))
    traj = GraphTrajectory()
    betas = None
    for t in range(data.t):
        At = np.concatenate([data.X[:, t, :], data.U[:, t, :]], axis=0)
        G = gamma * G + At @ At.T
        W, omega, traces, betas = _sem_solve_nodes(
            G, n, alpha / 2.0, config, beta0=betas, n_jobs=n_jobs)
        if (t + 1) % emit_every == 0 or t == data.t - 1:
            obj = sum(2.0 * tr.objective[-1] for tr in traces)
            traj.append(t, W, obj)
    return traj


def batch_grams(data: CascadeData, gamma: float):
    """Weighted Gram recomputed from scratch (test oracle for the
    recursive update)."""
    n = data.n
    G = np.zeros((2 * n, 2 * n))
    T = data.t
    for t in range(T):
        At = np.concatenate([data.X[:, t, :], data.U[:, t, :]], axis=0)
        G += gamma ** (T - 1 - t) * (At @ At.T)
    return G
