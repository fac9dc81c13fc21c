"""Classical factor-retention methods and the shared ML factor fitter.

Implements very simple structure (VSS, complexity 1), Velicer's minimum
average partial (squared partials), BIC and extended-BIC selection over
maximum-likelihood factor fits, Horn's parallel analysis, and the
eigenvalue-greater-than-one rule.

Parallel analysis and the eigenvalue rule operate on either the plain
correlation eigenvalues ("components", the parallel-analysis default)
or on the spectrum of the matrix with squared multiple correlations on
the diagonal ("factors", the common-factor spectrum the study pipeline
feeds to the eigenvalue rule).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .correlation import (CorrelationMatrix, pearson_matrix, sym_eigen,
                          squared_multiple_correlations, tetrachoric_matrix)
from .exceptions import InfeasibleModelError, NonConvergenceError

__all__ = [
    "EfaFit",
    "RetentionEstimate",
    "fit_efa",
    "varimax",
    "bic_select",
    "ebic_select",
    "vss_select",
    "map_select",
    "kaiser_rule",
    "parallel_analysis",
    "observed_eigenvalues",
]

#: Lower bound on uniquenesses (Heywood floor).
UNIQUENESS_FLOOR = 0.001

#: Default deepest model considered by the selection rules.
DEFAULT_KMAX = 10


@dataclass(frozen=True)
class EfaFit:
    """One maximum-likelihood exploratory factor solution."""

    k: int
    loadings: np.ndarray
    uniquenesses: np.ndarray
    discrepancy: float
    chi_square: float
    df: int
    n_params: int


@dataclass(frozen=True)
class RetentionEstimate:
    """A method's retained dimension count plus its per-k diagnostics."""

    method: str
    k_hat: int
    statistics: dict


def efa_df(p: int, k: int) -> int:
    """Degrees of freedom of the k-factor model on p items."""
    return ((p - k) ** 2 - (p + k)) // 2


def _profile_objective(psi: np.ndarray, r: np.ndarray, k: int) -> float:
    # ML discrepancy with loadings profiled out: eigenvalues of the
    # uniqueness-scaled matrix beyond the first k must equal 1 at the optimum.
    sc = 1.0 / np.sqrt(psi)
    scaled = sc[:, None] * r * sc[None, :]
    values = np.linalg.eigvalsh(scaled)[::-1]
    tail = np.maximum(values[k:], 1e-12)
    return float(np.sum(tail - np.log(tail) - 1.0))


def _profile_loadings(psi: np.ndarray, r: np.ndarray, k: int) -> np.ndarray:
    sc = 1.0 / np.sqrt(psi)
    scaled = sc[:, None] * r * sc[None, :]
    values, vectors = np.linalg.eigh(scaled)
    values = values[::-1][:k]
    vectors = vectors[:, ::-1][:, :k]
    return np.sqrt(psi)[:, None] * vectors * np.sqrt(np.maximum(values - 1.0, 0.0))


def _profile_gradient(psi: np.ndarray, r: np.ndarray, k: int) -> np.ndarray:
    loadings = _profile_loadings(psi, r, k)
    residual = loadings @ loadings.T + np.diag(psi) - r
    return np.diag(residual) / psi ** 2


def fit_efa(r: CorrelationMatrix | np.ndarray, k: int, n: int) -> EfaFit:
    """Fit a k-factor model to a correlation matrix by profiled ML.

    Loadings are concentrated out through the eigendecomposition of the
    uniqueness-scaled matrix; the remaining optimization over
    uniquenesses runs L-BFGS-B with an analytic gradient. The reported
    chi-square applies the Bartlett correction
    ``(n - 1 - (2p + 5)/6 - 2k/3) * discrepancy``.

    Raises
    ------
    InfeasibleModelError
        If the model has negative degrees of freedom.
    NonConvergenceError
        If the optimizer fails; carries the last uniqueness iterate.
    """
    rv = np.asarray(getattr(r, "values", r), dtype=float)
    p = rv.shape[0]
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    df = efa_df(p, k)
    if df < 0:
        raise InfeasibleModelError(f"{k} factors on {p} items have df = {df} < 0")

    smc = squared_multiple_correlations(rv)
    start = np.clip(1.0 - smc, 0.05, 0.95)
    bounds = [(UNIQUENESS_FLOOR, 1.0)] * p
    res = minimize(_profile_objective, start, args=(rv, k), jac=_profile_gradient,
                   method="L-BFGS-B", bounds=bounds,
                   options={"maxiter": 1000, "maxfun": 5000})
    if not res.success:
        # L-BFGS-B line searches occasionally abort near the boundary;
        # retry once from a neutral start before giving up.
        res = minimize(_profile_objective, np.full(p, 0.5), args=(rv, k),
                       jac=_profile_gradient, method="L-BFGS-B", bounds=bounds,
                       options={"maxiter": 1000, "maxfun": 5000})
    if not res.success:
        raise NonConvergenceError(
            f"factor optimizer failed for k={k}: {res.message}", last_iterate=res.x)

    if res.fun < 1e-8:
        # Perfect fit leaves the loaded directions unidentified (a flat
        # optimum manifold); polish from near-unit uniquenesses so the
        # canonical minimal-loading solution is reported.
        polish = minimize(_profile_objective, np.full(p, 0.999), args=(rv, k),
                          jac=_profile_gradient, method="L-BFGS-B", bounds=bounds,
                          options={"maxiter": 1000, "maxfun": 5000})
        if polish.success and polish.fun <= max(res.fun, 1e-8):
            res = polish

    psi = np.asarray(res.x)
    discrepancy = max(float(res.fun), 0.0)
    loadings = _profile_loadings(psi, rv, k)
    chi_square = (n - 1 - (2 * p + 5) / 6.0 - 2 * k / 3.0) * discrepancy
    n_params = p * k - k * (k - 1) // 2 + p
    return EfaFit(k=k, loadings=loadings, uniquenesses=psi, discrepancy=discrepancy,
                  chi_square=float(chi_square), df=df, n_params=n_params)


def varimax(loadings: np.ndarray, normalize: bool = True, max_iter: int = 500,
            tol: float = 1e-8) -> np.ndarray:
    """Orthogonal varimax rotation (Kaiser-normalized by default)."""
    L = np.asarray(loadings, dtype=float)
    p, k = L.shape
    if k < 2:
        return L.copy()
    if normalize:
        comm = np.sqrt(np.sum(L ** 2, axis=1))
        comm[comm == 0] = 1.0
        L = L / comm[:, None]
    rotation = np.eye(k)
    criterion = 0.0
    for _ in range(max_iter):
        rotated = L @ rotation
        target = rotated ** 3 - rotated @ np.diag(np.sum(rotated ** 2, axis=0)) / p
        u, s, vt = np.linalg.svd(L.T @ target)
        rotation = u @ vt
        new_criterion = float(np.sum(s))
        if new_criterion < criterion * (1.0 + tol):
            break
        criterion = new_criterion
    L = L @ rotation
    if normalize:
        L = L * comm[:, None]
    return L


def _feasible_range(p: int, kmax: int) -> list[int]:
    ks = [k for k in range(1, kmax + 1) if efa_df(p, k) >= 0]
    if not ks:
        raise InfeasibleModelError(f"no feasible factor count in 1..{kmax} for p={p}")
    return ks


def bic_select(r: CorrelationMatrix | np.ndarray, n: int,
               kmax: int = DEFAULT_KMAX) -> RetentionEstimate:
    """Minimize ``chi_square_k - df_k * ln n`` over k = 1..kmax.

    Infeasible depths (negative df) are skipped; the statistics vector
    carries NaN there.
    """
    rv = np.asarray(getattr(r, "values", r), dtype=float)
    p = rv.shape[0]
    ks = _feasible_range(p, kmax)
    scores = np.full(kmax, np.nan)
    for k in ks:
        fit = fit_efa(rv, k, n)
        scores[k - 1] = fit.chi_square - fit.df * np.log(n)
    k_hat = int(np.nanargmin(scores)) + 1
    return RetentionEstimate(method="bic", k_hat=k_hat, statistics={"bic": scores})


def ebic_select(r: CorrelationMatrix | np.ndarray, n: int, kmax: int = DEFAULT_KMAX,
                gamma: float = 0.5) -> RetentionEstimate:
    """BIC selection with the extended penalty ``2 gamma n_params ln p``."""
    rv = np.asarray(getattr(r, "values", r), dtype=float)
    p = rv.shape[0]
    ks = _feasible_range(p, kmax)
    scores = np.full(kmax, np.nan)
    for k in ks:
        fit = fit_efa(rv, k, n)
        bic = fit.chi_square - fit.df * np.log(n)
        scores[k - 1] = bic + 2.0 * gamma * fit.n_params * np.log(p)
    k_hat = int(np.nanargmin(scores)) + 1
    return RetentionEstimate(method="ebic", k_hat=k_hat, statistics={"ebic": scores})


def vss_select(r: CorrelationMatrix | np.ndarray, n: int,
               kmax: int = DEFAULT_KMAX) -> RetentionEstimate:
    """Very simple structure, complexity 1.

    Each k-factor solution is varimax-rotated, simplified to its largest
    loading per item, and scored by how much of the off-diagonal
    correlation mass the simplified pattern reproduces. Ties go to the
    smaller k.
    """
    rv = np.asarray(getattr(r, "values", r), dtype=float)
    p = rv.shape[0]
    ks = _feasible_range(p, kmax)
    upper = np.triu_indices(p, 1)
    denominator = float(np.sum(rv[upper] ** 2))
    scores = np.full(kmax, np.nan)
    for k in ks:
        fit = fit_efa(rv, k, n)
        loadings = varimax(fit.loadings) if k > 1 else fit.loadings
        simplified = np.zeros_like(loadings)
        rows = np.arange(p)
        cols = np.argmax(np.abs(loadings), axis=1)
        simplified[rows, cols] = loadings[rows, cols]
        reproduced = simplified @ simplified.T
        scores[k - 1] = 1.0 - np.sum((rv[upper] - reproduced[upper]) ** 2) / denominator
    k_hat = int(np.nanargmax(scores)) + 1
    return RetentionEstimate(method="vss", k_hat=k_hat, statistics={"vss": scores})


def map_select(r: CorrelationMatrix | np.ndarray,
               kmax: int = DEFAULT_KMAX) -> RetentionEstimate:
    """Velicer's minimum average partial (squared partials).

    Partial out the first k principal components and average the squared
    off-diagonal partial correlations; retain the minimizing k. The
    search truncates if a residual variance hits zero.
    """
    rv = np.asarray(getattr(r, "values", r), dtype=float)
    p = rv.shape[0]
    if kmax > p - 2:
        raise ValueError(f"kmax must be <= p - 2 = {p - 2}, got {kmax}")
    values, vectors = sym_eigen(rv)
    scores = np.full(kmax, np.nan)
    for k in range(1, kmax + 1):
        axes = vectors[:, :k] * np.sqrt(np.maximum(values[:k], 0.0))
        residual = rv - axes @ axes.T
        d = np.diag(residual).copy()
        if np.any(d <= 0):
            break
        partials = residual / np.sqrt(np.outer(d, d))
        scores[k - 1] = (np.sum(partials ** 2) - p) / (p * (p - 1))
    if np.all(np.isnan(scores)):
        raise InfeasibleModelError("no principal component leaves positive residuals")
    k_hat = int(np.nanargmin(scores)) + 1
    return RetentionEstimate(method="map", k_hat=k_hat, statistics={"map": scores})


def _reduced_matrix(rv: np.ndarray) -> np.ndarray:
    reduced = rv.copy()
    np.fill_diagonal(reduced, squared_multiple_correlations(rv))
    return reduced


def observed_eigenvalues(r: CorrelationMatrix | np.ndarray,
                         eigen_basis: str = "factors") -> np.ndarray:
    """Eigenvalues used by parallel analysis and the eigenvalue rule.

    "components" takes the correlation matrix as is; "factors" first
    replaces the diagonal with squared multiple correlations (the
    common-factor spectrum).
    """
    rv = np.asarray(getattr(r, "values", r), dtype=float)
    if eigen_basis == "components":
        return sym_eigen(rv)[0]
    if eigen_basis == "factors":
        return sym_eigen(_reduced_matrix(rv))[0]
    raise ValueError(f"unknown eigen_basis {eigen_basis!r}")


def kaiser_rule(r: CorrelationMatrix | np.ndarray,
                eigen_basis: str = "components") -> RetentionEstimate:
    """Count of eigenvalues strictly greater than one."""
    values = observed_eigenvalues(r, eigen_basis=eigen_basis)
    return RetentionEstimate(method="kaiser", k_hat=int(np.sum(values > 1.0)),
                             statistics={"eigenvalues": values})


def _correlation_for(data: np.ndarray) -> CorrelationMatrix:
    if np.isin(data, (0, 1)).all():
        return tetrachoric_matrix(data)
    return pearson_matrix(data)


def parallel_analysis(data, n_iter: int = 20, seed: int = 0,
                      kmax: int = DEFAULT_KMAX,
                      eigen_basis: str = "components") -> RetentionEstimate:
    """Horn's parallel analysis against column-permuted reference data.

    The reference spectrum is the positionwise mean over ``n_iter``
    copies with every column independently permuted (margins preserved,
    structure destroyed), each re-estimated with the same correlation
    method as the observed data. ``k_hat`` is the number of leading
    positions where the observed eigenvalue exceeds the reference.
    """
    x = np.asarray(getattr(data, "values", data))
    if n_iter < 1:
        raise ValueError(f"n_iter must be >= 1, got {n_iter}")
    n = x.shape[0]
    observed = observed_eigenvalues(_correlation_for(x), eigen_basis=eigen_basis)
    rng = np.random.default_rng(seed)
    reference = np.zeros_like(observed)
    for _ in range(n_iter):
        permuted = np.column_stack([col[rng.permutation(n)] for col in x.T])
        reference += observed_eigenvalues(_correlation_for(permuted),
                                          eigen_basis=eigen_basis)
    reference /= n_iter
    exceed = observed > reference
    k_hat = int(np.argmin(exceed)) if not exceed.all() else exceed.size
    return RetentionEstimate(
        method="pa", k_hat=k_hat,
        statistics={"observed": observed[:kmax], "reference": reference[:kmax]})
