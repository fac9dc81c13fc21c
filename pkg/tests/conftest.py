import os

import numpy as np
import pytest

from egakit.datagen import (FactorSpec, build_implied_sigma, dichotomize,
                            sample_dataset)

ACCEPTANCE_REPORT = []


def record_criterion(line: str) -> None:
    """Collect one pass/fail line for the acceptance summary."""
    ACCEPTANCE_REPORT.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_REPORT:
        terminalreporter.write_line(line)


def block_population_matrix(n_factors: int, items_per_factor: int,
                            factor_corr: float) -> np.ndarray:
    """Population latent correlation matrix of the study design:
    0.5 within factors, factor_corr/2 between (unity loadings/variances)."""
    p = n_factors * items_per_factor
    r = np.full((p, p), factor_corr / 2.0)
    for a in range(n_factors):
        block = slice(a * items_per_factor, (a + 1) * items_per_factor)
        r[block, block] = 0.5
    np.fill_diagonal(r, 1.0)
    return r


def simulate_binary(n_factors: int, items_per_factor: int, n: int,
                    factor_corr: float, seed: int) -> np.ndarray:
    spec = FactorSpec(n_factors=n_factors, items_per_factor=items_per_factor,
                      factor_corr=factor_corr)
    sigma = build_implied_sigma(spec)
    return dichotomize(sample_dataset(sigma, n, seed)).values


def random_correlation(p: int, n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return np.corrcoef(rng.standard_normal((n, p)), rowvar=False)


@pytest.fixture(scope="session")
def irdt_path():
    path = os.environ.get("EGAKIT_IRDT_CSV",
                          os.path.join(os.path.dirname(__file__), "..", "data", "irdt.csv"))
    if not os.path.exists(path):
        pytest.skip("IRDT CSV not present; fetch it with scripts/fetch_irdt.py")
    return path
