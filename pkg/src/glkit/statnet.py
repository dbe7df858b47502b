"""Statistical topology inference.

Correlation and partial-correlation networks with Fisher tests and
Benjamini-Hochberg FDR control, the graphical lasso, the Laplacian-
constrained GMRF estimator, and neighborhood-based lasso selection.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc

from .errors import (
    BadParameter,
    NoMLE,
    SingularCovariance,
    TooFewSamples,
)
from .graphcore import ShiftKind, ShiftOperator, as_signal_matrix
from .solvers import (
    SolveTrace,
    SolverConfig,
    lasso_cd,
    prox_neg_logdet,
    soft_threshold,
)


@dataclass(frozen=True)
class PairTest:
    i: int
    j: int
    statistic: float
    p_value: float
    reject: bool


@dataclass
class TestTable:
    """Per-pair test results for the hypothesis-testing learners."""

    pairs: list
    method: str
    q: float
    flags: dict = field(default_factory=dict)

    def __post_init__(self):
        seen = set()
        for t in self.pairs:
            if not (0.0 <= t.p_value <= 1.0):
                raise BadParameter(f"p-value {t.p_value} outside [0, 1]")
            if not t.i < t.j or (t.i, t.j) in seen:
                raise BadParameter("pairs must cover each i < j exactly once")
            seen.add((t.i, t.j))

    def rejected(self):
        return [(t.i, t.j) for t in self.pairs if t.reject]


def sample_covariance(X, centered: bool = False) -> np.ndarray:
    """Empirical covariance (1/P) sum_p x_p x_p', optionally after
    removing the per-vertex sample mean."""
    X = as_signal_matrix(X)
    p = X.shape[1]
    if p < 1 or (centered and p < 2):
        raise TooFewSamples("covariance needs at least one sample (two if centering)")
    if centered:
        X = X - X.mean(axis=1, keepdims=True)
    return (X @ X.T) / p


def bh_select(p_values, q: float) -> np.ndarray:
    """Benjamini-Hochberg step-up: reject the largest prefix of the
    sorted p-values with p_(i) <= (i/m) q. Returns a boolean mask in the
    original order."""
    p = np.asarray(p_values, dtype=float)
    m = p.size
    order = np.argsort(p, kind="stable")
    thresh = q * (np.arange(1, m + 1) / m)
    passing = np.nonzero(p[order] <= thresh)[0]
    reject = np.zeros(m, dtype=bool)
    if passing.size:
        reject[order[: passing[-1] + 1]] = True
    return reject


def _fisher_pvalues(rho, null_var: float):
    """Two-sided p-values of atanh(rho) under Normal(0, null_var);
    saturated coefficients (|rho| = 1) get p = 0."""
    rho = np.asarray(rho, dtype=float)
    sat = np.abs(rho) >= 1.0 - 1e-12
    z = np.arctanh(np.clip(rho, -1.0 + 1e-12, 1.0 - 1e-12))
    pvals = erfc(np.abs(z) / np.sqrt(2.0 * null_var))
    pvals[sat] = 0.0
    z[sat] = np.sign(rho[sat]) * np.inf
    return z, pvals, sat


def _build_table(rho, null_var, q, method, n):
    iu, ju = np.triu_indices(n, 1)
    z, pvals, sat = _fisher_pvalues(rho[iu, ju], null_var)
    reject = bh_select(pvals, q)
    pairs = [PairTest(int(i), int(j), float(zz), float(pv), bool(rj))
             for i, j, zz, pv, rj in zip(iu, ju, z, pvals, reject)]
    flags = {"saturated_pairs": [(int(i), int(j))
                                 for i, j, s in zip(iu, ju, sat) if s]}
    table = TestTable(pairs, method, q, flags)
    W = np.zeros((n, n))
    w = np.where(reject, np.abs(rho[iu, ju]), 0.0)
    W[iu, ju] = w
    W[ju, iu] = w
    return table, ShiftOperator(W, ShiftKind.ADJACENCY)


def correlation_network(X, q: float = 0.05):
    """Edges where the Pearson correlation tests nonzero at FDR level q.

    Fisher statistics z_ij = atanh(rho_ij) are compared against their
    approximate Normal(0, 1/(P-3)) null; the Benjamini-Hochberg step-up
    rule selects the edge set and accepted pairs are weighted |rho_ij|.
    """
    X = as_signal_matrix(X)
    n, p = X.shape
    if p <= 3:
        raise TooFewSamples("correlation test needs P >= 4")
    cov = sample_covariance(X, centered=True)
    d = np.sqrt(np.diag(cov))
    d = np.where(d > 0, d, 1.0)  # constant rows correlate with nothing
    rho = cov / np.outer(d, d)
    rho[np.diag(cov) == 0, :] = 0.0
    rho[:, np.diag(cov) == 0] = 0.0
    return _build_table(rho, 1.0 / (p - 3), q, "correlation", n)


def partial_correlation_network(X, q: float = 0.05, ridge: bool = False):
    """Same testing pipeline on partial correlations from the inverse
    sample covariance; the Fisher null variance carries the 1/(P-N-1)
    degrees-of-freedom correction (an approximation, documented).

    With ``ridge`` a diagonal load of 1e-3 trace/N rescues singular
    covariances; otherwise they raise SingularCovariance.
    """
    X = as_signal_matrix(X)
    n, p = X.shape
    if p <= n + 1:
        raise TooFewSamples("partial-correlation test needs P >= N + 2")
    cov = sample_covariance(X, centered=True)
    vals = np.linalg.eigvalsh(cov)
    if vals.min() <= 1e-12 * max(vals.max(), 1.0):
        if not ridge:
            raise SingularCovariance(
                "sample covariance is singular; pass ridge=True to regularize")
        cov = cov + (1e-3 * np.trace(cov) / n) * np.eye(n)
    theta = np.linalg.inv(cov)
    d = np.sqrt(np.diag(theta))
    rho = -theta / np.outer(d, d)
    return _build_table(rho, 1.0 / (p - n - 1), q, "partial-correlation", n)


def population_partial_correlations(Theta) -> np.ndarray:
    """Partial correlations -theta_ij / sqrt(theta_ii theta_jj) from an
    exact precision matrix (population-level helper)."""
    Theta = np.asarray(Theta, dtype=float)
    d = np.sqrt(np.diag(Theta))
    return -Theta / np.outer(d, d)


def auto_lambda(n: int, p: int) -> float:
    """Penalty rate 2 sqrt(log N / P) used for consistent support recovery."""
    return 2.0 * np.sqrt(np.log(n) / p)


def _as_covariance(data) -> np.ndarray:
    """Signals (SignalSet or N x P array) -> sample covariance;
    a symmetric square array passes through as the covariance itself."""
    M = as_signal_matrix(data)
    if M.ndim == 2 and M.shape[0] == M.shape[1] and \
            np.abs(M - M.T).max(initial=0.0) <= 1e-10 * max(1.0, np.abs(M).max()):
        return M
    return sample_covariance(M)


def graphical_lasso(data, lam: float, penalize_diagonal: bool = False,
                    config: SolverConfig | None = None):
    """l1-penalized Gaussian maximum-likelihood precision estimation.

    Maximizes logdet(T) - trace(S T) - lam ||T||_1 by ADMM, alternating
    the log-det prox with elementwise soft thresholding. ``data`` may be
    a SignalSet (covariance taken with divisor P) or a covariance
    matrix. Returns (Theta, trace); Theta is positive definite by
    construction.
    """
    if lam < 0:
        raise BadParameter("lam must be nonnegative")
    config = config or SolverConfig(tol=1e-10)
    S = _as_covariance(data)
    n = S.shape[0]
    if lam == 0 and np.linalg.eigvalsh(S).min() <= 1e-12 * max(1.0, np.abs(S).max()):
        raise NoMLE("singular covariance with lam = 0: the MLE does not exist")
    mask = np.ones((n, n))
    if not penalize_diagonal:
        np.fill_diagonal(mask, 0.0)
    rho = config.rho
    Z = np.eye(n)
    U = np.zeros((n, n))
    trace = SolveTrace()
    for it in range(config.max_iters):
        T = prox_neg_logdet(Z - U, S, rho)
        Z_prev = Z
        Z = soft_threshold(T + U, lam * mask / rho)
        U = U + T - Z
        r = float(np.linalg.norm(T - Z))
        s = float(rho * np.linalg.norm(Z - Z_prev))
        sign, logdet = np.linalg.slogdet(T)
        obj = -logdet + float((S * T).sum()) + lam * float(np.abs(mask * T).sum())
        trace.log(obj, r, s)
        trace.iters_used = it + 1
        scale = max(1.0, float(np.linalg.norm(T)))
        if r <= 1e-9 * scale * n and s <= 1e-9 * scale * n:
            trace.converged = True
            break
        if config.adapt_rho and (it + 1) % 50 == 0:
            if r > config.adapt_ratio * s:
                rho *= config.adapt_factor
                U /= config.adapt_factor
            elif s > config.adapt_ratio * r:
                rho /= config.adapt_factor
                U *= config.adapt_factor
    trace.notes["support"] = Z != 0
    return T, trace


class _LaplacianLoaded:
    """Set {L + gamma I : L a combinatorial Laplacian, gamma >= 0},
    i.e. symmetric, nonpositive off-diagonals, equal nonnegative row sums."""

    @staticmethod
    def project(M, iters: int = 4000, tol: float = 1e-13):
        x = 0.5 * (M + M.T)
        p1 = np.zeros_like(x)
        p2 = np.zeros_like(x)
        n = x.shape[0]
        prev = x.copy()
        for _ in range(iters):
            v = x + p1
            d = np.diag(v).copy()
            y = np.minimum(0.5 * (v + v.T), 0.0)
            np.fill_diagonal(y, d)
            p1 = v - y
            v = y + p2
            t = max(0.0, float(v.sum()) / n)
            x = v - np.outer(v.sum(axis=1) - t, np.ones(n)) / n
            p2 = v - x
            if np.abs(x - prev).max(initial=0.0) <= tol * max(1.0, np.abs(x).max()):
                break
            prev = x.copy()
        return x


def laplacian_gmrf(data, lam: float, config: SolverConfig | None = None):
    """Precision estimation constrained to Theta = L + gamma I.

    Same ADMM skeleton as the graphical lasso, but the sparse block is
    projected onto the diagonally-loaded Laplacian set; on that set the
    l1 norm is linear, so the penalty enters as a fixed tilt before the
    projection. Returns (L as a Laplacian shift, gamma, trace).
    """
    if lam < 0:
        raise BadParameter("lam must be nonnegative")
    config = config or SolverConfig()
    S = _as_covariance(data)
    n = S.shape[0]
    tilt = -np.ones((n, n))
    np.fill_diagonal(tilt, 1.0)  # <tilt, Z> = ||Z||_1 on the constraint set
    rho = config.rho
    Z = np.eye(n)
    U = np.zeros((n, n))
    trace = SolveTrace()
    for it in range(config.max_iters):
        T = prox_neg_logdet(Z - U, S, rho)
        Z_prev = Z
        Z = _LaplacianLoaded.project(T + U - (lam / rho) * tilt)
        U = U + T - Z
        r = float(np.linalg.norm(T - Z))
        s = float(rho * np.linalg.norm(Z - Z_prev))
        sign, logdet = np.linalg.slogdet(T)
        obj = -logdet + float((S * T).sum()) + lam * float(np.abs(T).sum())
        trace.log(obj, r, s)
        trace.iters_used = it + 1
        scale = max(1.0, float(np.linalg.norm(T)))
        if r <= 1e-9 * scale * n and s <= 1e-9 * scale * n:
            trace.converged = True
            break
    gamma = max(0.0, float(Z.sum()) / n)
    W = np.maximum(-(Z - np.diag(np.diag(Z))), 0.0)
    W = 0.5 * (W + W.T)
    L = np.diag(W.sum(axis=1)) - W
    trace.notes["theta"] = L + gamma * np.eye(n)
    return ShiftOperator(L, ShiftKind.LAPLACIAN), gamma, trace


def neighborhood_lasso(X, lam: float, rule: str = "or",
                       config: SolverConfig | None = None, n_jobs: int = 1):
    """Per-node lasso regressions combined into an edge set.

    Node i's signal is regressed on all other rows; the support of the
    coefficient vector proposes i's neighborhood, and the OR (either
    direction) or AND (both directions) rule symmetrizes the proposals.
    Returns an unweighted adjacency plus the full coefficient table
    B[i, j] = weight of x_j in the regression of x_i.
    """
    if rule not in ("or", "and"):
        raise BadParameter(f"unknown combination rule {rule!r}")
    X = as_signal_matrix(X)
    n, p = X.shape
    if p < 2:
        raise TooFewSamples("neighborhood regression needs P >= 2")
    config = config or SolverConfig()

    def fit(i):
        others = np.delete(np.arange(n), i)
        beta, _ = lasso_cd(X[others].T, X[i], lam, config)
        return i, others, beta

    B = np.zeros((n, n))
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(fit, range(n)))
    else:
        results = [fit(i) for i in range(n)]
    for i, others, beta in results:
        B[i, others] = beta
    nz = B != 0
    edges = (nz | nz.T) if rule == "or" else (nz & nz.T)
    W = edges.astype(float)
    np.fill_diagonal(W, 0.0)
    return ShiftOperator(W, ShiftKind.ADJACENCY), B
