"""Simulated datasets from known block-diagonal factor structures.

Items load on exactly one factor; the population covariance is
``Lambda Psi Lambda' + Theta`` with unit loadings and unit residual
variances in the study design. Continuous draws are dichotomized at the
theoretical mean of zero.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import NotPositiveDefiniteError

__all__ = [
    "FactorSpec",
    "ContinuousDataset",
    "BinaryDataset",
    "SimulationCondition",
    "build_implied_sigma",
    "sample_dataset",
    "dichotomize",
    "condition_grid",
]

#: Levels of the simulation design grid.
GRID_N_FACTORS = (2, 4)
GRID_ITEMS_PER_FACTOR = (5, 10)
GRID_SAMPLE_SIZES = (100, 500, 1000, 5000)
GRID_FACTOR_CORRS = (0.0, 0.2, 0.5, 0.7)


@dataclass(frozen=True)
class FactorSpec:
    """Generating model: factor count, items per factor, and parameters.

    ``factor_corr`` is the common off-diagonal of the factor covariance
    matrix Psi (unit diagonal); ``loadings`` and ``residual_var`` are
    shared by every item, matching the unity-parameter study design.
    """

    n_factors: int
    items_per_factor: int
    factor_corr: float
    loadings: float = 1.0
    residual_var: float = 1.0

    def __post_init__(self):
        if self.n_factors < 1:
            raise ValueError(f"n_factors must be >= 1, got {self.n_factors}")
        if self.items_per_factor < 1:
            raise ValueError(f"items_per_factor must be >= 1, got {self.items_per_factor}")
        if not 0.0 <= self.factor_corr < 1.0:
            raise ValueError(f"factor_corr must lie in [0, 1), got {self.factor_corr}")
        if self.residual_var <= 0.0:
            raise ValueError(f"residual_var must be positive, got {self.residual_var}")
        # Equicorrelation Psi is PD iff corr > -1/(m-1); corr >= 0 always passes,
        # but keep the check so future generalizations fail loudly.
        if self.n_factors > 1 and self.factor_corr <= -1.0 / (self.n_factors - 1):
            raise NotPositiveDefiniteError(
                f"factor_corr {self.factor_corr} makes Psi indefinite for "
                f"{self.n_factors} factors")

    @property
    def n_items(self) -> int:
        return self.n_factors * self.items_per_factor

    def loading_matrix(self) -> np.ndarray:
        """Block-diagonal p x m loading matrix (one loading per item)."""
        lam = np.zeros((self.n_items, self.n_factors))
        for a in range(self.n_factors):
            lam[a * self.items_per_factor:(a + 1) * self.items_per_factor, a] = self.loadings
        return lam

    def factor_cov(self) -> np.ndarray:
        """Unit-diagonal factor covariance matrix Psi."""
        psi = np.full((self.n_factors, self.n_factors), self.factor_corr)
        np.fill_diagonal(psi, 1.0)
        return psi


@dataclass(frozen=True)
class ContinuousDataset:
    """Multivariate-normal item responses plus the seed that drew them."""

    values: np.ndarray
    seed: int

    @property
    def n_obs(self) -> int:
        return self.values.shape[0]

    @property
    def n_items(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class BinaryDataset:
    """0/1 item responses."""

    values: np.ndarray

    def __post_init__(self):
        if not np.isin(self.values, (0, 1)).all():
            raise ValueError("binary dataset must contain only 0 and 1")

    @property
    def n_obs(self) -> int:
        return self.values.shape[0]

    @property
    def n_items(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, order=True)
class SimulationCondition:
    """One cell of the simulation design."""

    n_factors: int
    items_per_factor: int
    sample_size: int
    factor_corr: float

    def spec(self) -> FactorSpec:
        return FactorSpec(n_factors=self.n_factors,
                          items_per_factor=self.items_per_factor,
                          factor_corr=self.factor_corr)


def build_implied_sigma(spec: FactorSpec) -> np.ndarray:
    """Population covariance ``Lambda Psi Lambda' + Theta`` of a spec.

    Raises
    ------
    NotPositiveDefiniteError
        If the implied factor covariance is not positive definite.
    """
    psi = spec.factor_cov()
    if np.linalg.eigvalsh(psi)[0] <= 0.0:
        raise NotPositiveDefiniteError(
            f"factor covariance with corr {spec.factor_corr} is not positive definite")
    lam = spec.loading_matrix()
    sigma = lam @ psi @ lam.T + spec.residual_var * np.eye(spec.n_items)
    return (sigma + sigma.T) / 2.0


def sample_dataset(sigma: np.ndarray, n: int, seed: int) -> ContinuousDataset:
    """Draw n i.i.d. rows from N(0, sigma) via Cholesky.

    Uses the PCG64 generator, so identical ``(sigma, n, seed)`` give
    bit-identical datasets on any platform.

    Raises
    ------
    ValueError
        If ``n < 1``.
    NotPositiveDefiniteError
        If sigma has a non-PD leading minor; the error names it.
    """
    sigma = np.asarray(sigma, dtype=float)
    if n < 1:
        raise ValueError(f"need at least one observation, got n={n}")
    try:
        chol = scipy.linalg.cholesky(sigma, lower=True)
    except scipy.linalg.LinAlgError as exc:
        minor = getattr(exc, "args", ("",))[0]
        # scipy reports "k-th leading minor ... is not positive definite"
        order = None
        if isinstance(minor, str) and minor[:1].isdigit():
            order = int(minor.split("-")[0])
        raise NotPositiveDefiniteError(
            f"covariance is not positive definite: {minor}", minor=order) from exc
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, sigma.shape[0]))
    return ContinuousDataset(values=z @ chol.T, seed=seed)


def dichotomize(data: ContinuousDataset | np.ndarray) -> BinaryDataset:
    """Threshold at the theoretical mean: 1 where value > 0, else 0.

    The cut is exactly zero (the population mean), never the sample
    mean, so columns can be degenerate in small samples.
    """
    x = np.asarray(getattr(data, "values", data), dtype=float)
    return BinaryDataset(values=(x > 0.0).astype(np.int8))


def condition_grid() -> list[SimulationCondition]:
    """The 64-cell design grid in lexicographic order.

    Order: n_factors, items_per_factor, sample_size, factor_corr.
    """
    return [SimulationCondition(m, q, n, rho)
            for m, q, n, rho in itertools.product(
                GRID_N_FACTORS, GRID_ITEMS_PER_FACTOR,
                GRID_SAMPLE_SIZES, GRID_FACTOR_CORRS)]
