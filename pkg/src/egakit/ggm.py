"""Sparse Gaussian graphical model estimation.

Graphical LASSO by block coordinate descent (off-diagonal penalty only),
fit over a descending log-spaced regularization path and selected by the
extended Bayesian information criterion:

    EBIC = -2 * l(K) + |E| * ln n + 4 * gamma * |E| * ln p,

with l(K) = (n/2) * (log det K - tr(SK)) and |E| the number of nonzero
off-diagonal pairs. The selected precision matrix is standardized to
partial correlations rho_ij = -k_ij / sqrt(k_ii * k_jj).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .correlation import CorrelationMatrix
from .exceptions import DegeneratePathError, NonConvergenceError

__all__ = [
    "PrecisionMatrix",
    "PartialNetwork",
    "LambdaPath",
    "glasso",
    "lambda_path",
    "ebic_score",
    "ebic_glasso",
    "standardize_precision",
]

#: Entries of K below this magnitude count as exact zeros.
EDGE_ZERO_TOL = 1e-10

#: Ratio of the smallest to the largest path value.
LAMBDA_MIN_RATIO = 0.01

#: Number of path values.
N_LAMBDA = 100


@dataclass(frozen=True)
class PrecisionMatrix:
    """Estimated inverse covariance and the penalty it was fit at."""

    values: np.ndarray
    lam: float

    @property
    def n_items(self) -> int:
        return self.values.shape[0]

    def edge_count(self) -> int:
        """Number of nonzero off-diagonal pairs."""
        off = self.values[np.triu_indices(self.n_items, 1)]
        return int(np.count_nonzero(np.abs(off) > EDGE_ZERO_TOL))


@dataclass(frozen=True)
class PartialNetwork:
    """Partial-correlation network selected on the EBIC path."""

    weights: np.ndarray
    selected_lambda: float
    ebic: float
    edges: frozenset = field(init=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        pairs = frozenset(
            (i, j) for i, j in zip(*np.triu_indices(w.shape[0], 1)) if w[i, j] != 0.0)
        object.__setattr__(self, "edges", pairs)

    @property
    def n_items(self) -> int:
        return self.weights.shape[0]

    @property
    def n_edges(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class LambdaPath:
    """Descending penalty values, log-spaced with a fixed min/max ratio."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise ValueError("path needs at least two values")
        if np.any(v <= 0) or np.any(np.diff(v) >= 0):
            raise ValueError("path values must be positive and strictly decreasing")
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.size


def lambda_path(s: CorrelationMatrix | np.ndarray, n_values: int = N_LAMBDA) -> LambdaPath:
    """Log-spaced descending path from max |off-diagonal| down to 1% of it.

    Raises
    ------
    DegeneratePathError
        If the matrix has no off-diagonal signal (lambda_max == 0).
    """
    s = np.asarray(getattr(s, "values", s), dtype=float)
    p = s.shape[0]
    off = np.abs(s[np.triu_indices(p, 1)])
    lam_max = float(off.max()) if off.size else 0.0
    if lam_max <= 0.0:
        raise DegeneratePathError("all off-diagonal entries are zero; no path to fit")
    values = np.logspace(np.log10(lam_max), np.log10(lam_max * LAMBDA_MIN_RATIO), n_values)
    return LambdaPath(values=values)


def _cd_pass(w11: np.ndarray, s12: np.ndarray, lam: float, beta: np.ndarray,
             u: np.ndarray, indices) -> float:
    # One coordinate-descent pass over the given indices; u tracks W11 @ beta.
    diag = np.diag(w11)
    delta_max = 0.0
    for i in indices:
        b_old = beta[i]
        z = s12[i] - u[i] + diag[i] * b_old
        if z > lam:
            b_new = (z - lam) / diag[i]
        elif z < -lam:
            b_new = (z + lam) / diag[i]
        else:
            b_new = 0.0
        if b_new != b_old:
            beta[i] = b_new
            u += (b_new - b_old) * w11[:, i]
            delta_max = max(delta_max, abs(b_new - b_old))
    return delta_max


def _lasso_cd(w11: np.ndarray, s12: np.ndarray, lam: float, beta: np.ndarray,
              tol: float, max_iter: int = 10000) -> np.ndarray:
    # Coordinate descent for 0.5 b'Wb - s'b + lam |b|_1, warm-started in place.
    # Full passes only to (re)build the active set; inner passes stay on it.
    u = w11 @ beta
    everything = range(beta.size)
    remaining = max_iter
    while remaining > 0:
        delta = _cd_pass(w11, s12, lam, beta, u, everything)
        remaining -= 1
        if delta < tol:
            break
        active = np.flatnonzero(beta)
        while remaining > 0:
            delta = _cd_pass(w11, s12, lam, beta, u, active)
            remaining -= 1
            if delta < tol:
                break
    return beta


def glasso(s: CorrelationMatrix | np.ndarray, lam: float, tol: float = 1e-4,
           max_iter: int = 10000, warm_beta: np.ndarray | None = None,
           warm_w: np.ndarray | None = None) -> PrecisionMatrix:
    """L1-penalized precision matrix by block coordinate descent.

    Maximizes ``log det K - tr(SK) - lam * sum_{i!=j} |k_ij|``; the
    diagonal is never penalized. Convergence is declared when the
    largest covariance-entry change over a full sweep drops below
    ``tol``. ``warm_beta``/``warm_w`` carry state between path steps.

    Raises
    ------
    ValueError
        If ``lam < 0``.
    NonConvergenceError
        If ``max_iter`` sweeps do not converge; the error carries the
        last precision iterate.
    """
    s = np.asarray(getattr(s, "values", s), dtype=float)
    if lam < 0:
        raise ValueError(f"penalty must be non-negative, got {lam}")
    p = s.shape[0]
    if p == 1:
        return PrecisionMatrix(values=np.array([[1.0 / s[0, 0]]]), lam=lam)

    w = s.copy() if warm_w is None else warm_w.copy()
    np.fill_diagonal(w, np.diag(s))  # unpenalized diagonal: w_ii = s_ii
    beta = np.zeros((p, p)) if warm_beta is None else warm_beta.copy()
    inner_tol = tol * 1e-2
    mask = [np.arange(p) != j for j in range(p)]

    converged = False
    for _ in range(max_iter):
        w_old = w.copy()
        for j in range(p):
            idx = mask[j]
            w11 = w[np.ix_(idx, idx)]
            b = _lasso_cd(w11, s[idx, j], lam, beta[idx, j], inner_tol)
            beta[idx, j] = b
            w12 = w11 @ b
            w[idx, j] = w12
            w[j, idx] = w12
        if float(np.max(np.abs(w - w_old))) < tol:
            converged = True
            break

    k = np.empty((p, p))
    for j in range(p):
        idx = mask[j]
        b = beta[idx, j]
        k_jj = 1.0 / (w[j, j] - float(w[idx, j] @ b))
        k[j, j] = k_jj
        k[idx, j] = -b * k_jj
    k = (k + k.T) / 2.0
    k[np.abs(k) < EDGE_ZERO_TOL] = 0.0

    if not converged:
        raise NonConvergenceError(
            f"graphical lasso did not converge in {max_iter} sweeps at lambda={lam:.6g}",
            last_iterate=PrecisionMatrix(values=k, lam=lam))
    return PrecisionMatrix(values=k, lam=lam)


def _log_likelihood(k: np.ndarray, s: np.ndarray, n: int) -> float:
    sign, logdet = np.linalg.slogdet(k)
    if sign <= 0:
        raise ValueError("precision matrix must be positive definite")
    return 0.5 * n * (logdet - float(np.sum(s * k)))


def ebic_score(k: PrecisionMatrix | np.ndarray, s: CorrelationMatrix | np.ndarray,
               n: int, gamma: float) -> float:
    """Extended BIC of a fitted precision matrix (lower is better)."""
    kv = np.asarray(getattr(k, "values", k), dtype=float)
    sv = np.asarray(getattr(s, "values", s), dtype=float)
    p = kv.shape[0]
    off = kv[np.triu_indices(p, 1)]
    n_edges = int(np.count_nonzero(np.abs(off) > EDGE_ZERO_TOL))
    ll = _log_likelihood(kv, sv, n)
    return -2.0 * ll + n_edges * np.log(n) + 4.0 * gamma * n_edges * np.log(p)


def standardize_precision(k: np.ndarray) -> np.ndarray:
    """Partial correlations implied by a precision matrix.

    rho_ij = -k_ij / sqrt(k_ii * k_jj), with a zero diagonal.
    """
    k = np.asarray(getattr(k, "values", k), dtype=float)
    d = np.sqrt(np.diag(k))
    rho = -k / np.outer(d, d)
    np.fill_diagonal(rho, 0.0)
    return rho


def ebic_glasso(s: CorrelationMatrix | np.ndarray, n: int, gamma: float = 0.5,
                n_lambda: int = N_LAMBDA, tol: float = 1e-4) -> PartialNetwork:
    """Fit the full path, score each model, return the EBIC minimizer.

    Fits are warm-started from the previous (larger) penalty; EBIC ties
    break toward the sparser model. A matrix with no off-diagonal
    signal short-circuits to the empty network.
    """
    sv = np.asarray(getattr(s, "values", s), dtype=float)
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    p = sv.shape[0]
    try:
        path = lambda_path(sv, n_values=n_lambda)
    except DegeneratePathError:
        k = np.diag(1.0 / np.diag(sv))
        return PartialNetwork(weights=np.zeros((p, p)), selected_lambda=0.0,
                              ebic=ebic_score(k, sv, n, gamma))

    best = None
    warm_beta = None
    warm_w = None
    for lam in path.values:
        fit = glasso(sv, lam, tol=tol, warm_beta=warm_beta, warm_w=warm_w)
        warm_beta = _beta_from_precision(fit.values)
        warm_w = _cov_from_precision(fit.values, sv, lam)
        score = ebic_score(fit, sv, n, gamma)
        if best is None or score < best[0]:
            best = (score, lam, fit)
    score, lam, fit = best
    return PartialNetwork(weights=standardize_precision(fit.values), selected_lambda=float(lam),
                          ebic=float(score))


def _beta_from_precision(k: np.ndarray) -> np.ndarray:
    # Column regression coefficients implied by K: beta_ij = -k_ij / k_jj.
    beta = -k / np.diag(k)[None, :]
    np.fill_diagonal(beta, 0.0)
    return beta


def _cov_from_precision(k: np.ndarray, s: np.ndarray, lam: float) -> np.ndarray:
    # Covariance warm start for the next path step; keep the exact S diagonal.
    w = np.linalg.inv(k)
    w = (w + w.T) / 2.0
    np.fill_diagonal(w, np.diag(s))
    return w
