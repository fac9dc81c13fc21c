"""Correlation estimation for continuous and dichotomous items.

Provides product-moment (Pearson) and tetrachoric correlation matrices,
the bivariate-normal CDF kernel used by the tetrachoric likelihood,
eigenvalue-clipping PSD smoothing, and the shared symmetric
eigendecomposition primitive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import ndtr, ndtri

from .exceptions import ConstantColumnError, UndefinedCorrelationError

__all__ = [
    "CorrelationMatrix",
    "ContingencyTable2x2",
    "sym_eigen",
    "pearson_matrix",
    "bivariate_normal_cdf",
    "tetrachoric_pair",
    "tetrachoric_matrix",
    "nearest_psd",
    "squared_multiple_correlations",
]

#: Floor applied to eigenvalues during PSD smoothing.
PSD_EIGEN_FLOOR = 1e-6

#: Hard search bounds for the tetrachoric correlation.
RHO_BOUND = 0.999


@dataclass(frozen=True)
class CorrelationMatrix:
    """A symmetric unit-diagonal matrix of item associations.

    ``kind`` records the estimator that produced it ("pearson" or
    "tetrachoric").
    """

    values: np.ndarray
    kind: str

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"correlation matrix must be square, got shape {v.shape}")
        if self.kind not in ("pearson", "tetrachoric"):
            raise ValueError(f"unknown correlation kind {self.kind!r}")
        object.__setattr__(self, "values", v)

    @property
    def n_items(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class ContingencyTable2x2:
    """Cell counts of a pair of dichotomous items.

    ``n01`` counts rows where the first item is 0 and the second is 1.
    """

    n00: float
    n01: float
    n10: float
    n11: float

    def __post_init__(self):
        counts = (self.n00, self.n01, self.n10, self.n11)
        if any(c < 0 for c in counts):
            raise ValueError("cell counts must be non-negative")
        if sum(counts) < 1:
            raise ValueError("table must contain at least one observation")

    @property
    def total(self) -> float:
        return self.n00 + self.n01 + self.n10 + self.n11


def sym_eigen(m: np.ndarray, tol: float = 1e-8) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecompose a symmetric matrix, eigenvalues sorted descending.

    Returns ``(values, vectors)`` with orthonormal eigenvectors in the
    columns of ``vectors``, ordered to match ``values``.

    Raises
    ------
    ValueError
        If ``m`` is not symmetric within ``tol`` (max absolute
        difference against its transpose).
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    asym = float(np.max(np.abs(m - m.T))) if m.size else 0.0
    if asym > tol:
        raise ValueError(f"matrix is not symmetric: max |m - m.T| = {asym:.3e} > {tol:.0e}")
    values, vectors = np.linalg.eigh(m)
    return values[::-1], vectors[:, ::-1]


def pearson_matrix(data: np.ndarray) -> CorrelationMatrix:
    """Product-moment correlation matrix of an n x p data matrix.

    Raises
    ------
    ValueError
        If fewer than 3 rows are supplied.
    ConstantColumnError
        If any column has zero variance; the error names the columns.
    """
    x = np.asarray(getattr(data, "values", data), dtype=float)
    if x.ndim != 2:
        raise ValueError(f"expected an n x p matrix, got shape {x.shape}")
    n = x.shape[0]
    if n < 3:
        raise ValueError(f"need at least 3 observations, got {n}")
    spread = x.max(axis=0) - x.min(axis=0)
    constant = np.flatnonzero(spread == 0)
    if constant.size:
        raise ConstantColumnError(constant)
    r = np.corrcoef(x, rowvar=False)
    r = np.clip((r + r.T) / 2.0, -1.0, 1.0)
    np.fill_diagonal(r, 1.0)
    return CorrelationMatrix(values=r, kind="pearson")


# ---------------------------------------------------------------------------
# Bivariate normal CDF (Drezner-Wesolowsky / Genz hybrid quadrature)
# ---------------------------------------------------------------------------

# Gauss-Legendre half-nodes and weights on [-1, 1]; order picked by |rho|.
_GL6 = (
    (0.9324695142031521, 0.6612093864662645, 0.2386191860831969),
    (0.1713244923791704, 0.3607615730481386, 0.4679139345726910),
)
_GL12 = (
    (0.9815606342467192, 0.9041172563704749, 0.7699026741943047,
     0.5873179542866175, 0.3678314989981802, 0.1252334085114689),
    (0.0471753363865118, 0.1069393259953184, 0.1600783285433462,
     0.2031674267230659, 0.2334925365383548, 0.2491470458134028),
)
_GL20 = (
    (0.9931285991850949, 0.9639719272779138, 0.9122344282513259,
     0.8391169718222188, 0.7463319064601508, 0.6360536807265150,
     0.5108670019508271, 0.3737060887154195, 0.2277858511416451,
     0.0765265211334973),
    (0.0176140071391521, 0.0406014298003869, 0.0626720483341091,
     0.0832767415767048, 0.1019301198172404, 0.1181945319615184,
     0.1316886384491766, 0.1420961093183820, 0.1491729864726037,
     0.1527533871307258),
)

_TWO_PI = 2.0 * math.pi


def _phi(z: float) -> float:
    return float(ndtr(z))


def _bvn_upper(dh: float, dk: float, r: float) -> float:
    # P(X > dh, Y > dk) for standard bivariate normal with correlation r.
    # Gauss-Legendre quadrature on the arcsine-transformed Plackett
    # identity; |r| >= 0.925 uses the tail-difference expansion.
    if r == 0.0:
        return _phi(-dh) * _phi(-dk)
    ar = abs(r)
    if ar < 0.3:
        nodes, weights = _GL6
    elif ar < 0.75:
        nodes, weights = _GL12
    else:
        nodes, weights = _GL20

    h = dh
    k = dk
    hk = h * k
    bvn = 0.0
    if ar < 0.925:
        hs = (h * h + k * k) / 2.0
        asr = math.asin(r) / 2.0
        for x, w in zip(nodes, weights):
            for sgn in (-1.0, 1.0):
                sn = math.sin(asr * (1.0 + sgn * x))
                bvn += w * math.exp((sn * hk - hs) / (1.0 - sn * sn))
        return max(0.0, min(1.0, bvn * asr / _TWO_PI + _phi(-h) * _phi(-k)))

    if r < 0.0:
        k = -k
        hk = -hk
    if ar < 1.0:
        a2 = (1.0 - r) * (1.0 + r)
        a = math.sqrt(a2)
        bs = (h - k) ** 2
        c = (4.0 - hk) / 8.0
        d = (12.0 - hk) / 16.0
        asr = -(bs / a2 + hk) / 2.0
        if asr > -100.0:
            bvn = a * math.exp(asr) * (1.0 - c * (bs - a2) * (1.0 - d * bs / 5.0) / 3.0
                                       + c * d * a2 * a2 / 5.0)
        if -hk < 100.0:
            b = math.sqrt(bs)
            bvn -= math.exp(-hk / 2.0) * math.sqrt(_TWO_PI) * _phi(-b / a) * b \
                * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0)
        a /= 2.0
        for x, w in zip(nodes, weights):
            for sgn in (-1.0, 1.0):
                xs = (a * (1.0 + sgn * x)) ** 2
                rs = math.sqrt(1.0 - xs)
                asr = -(bs / xs + hk) / 2.0
                if asr > -100.0:
                    bvn += a * w * math.exp(asr) * (
                        math.exp(-hk * xs / (2.0 * (1.0 + rs) ** 2)) / rs
                        - (1.0 + c * xs * (1.0 + d * xs)))
        bvn = -bvn / _TWO_PI
    if r > 0.0:
        bvn += _phi(-max(h, k))
    else:
        bvn = -bvn
        if k > h:
            bvn += _phi(k) - _phi(h)
    return max(0.0, min(1.0, bvn))


def bivariate_normal_cdf(h: float, k: float, rho: float) -> float:
    """P(X <= h, Y <= k) for a standard bivariate normal pair.

    Absolute accuracy is well inside 1e-7 over rho in [-1, 1]; the
    degenerate rho = +-1 cases are handled exactly.
    """
    if not -1.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [-1, 1], got {rho}")
    if math.isinf(h) or math.isinf(k):
        if h == -math.inf or k == -math.inf:
            return 0.0
        if h == math.inf:
            return _phi(k)
        return _phi(h)
    if rho == 1.0:
        return _phi(min(h, k))
    if rho == -1.0:
        return max(0.0, _phi(h) + _phi(k) - 1.0)
    return _bvn_upper(-h, -k, rho)


# ---------------------------------------------------------------------------
# Tetrachoric correlation
# ---------------------------------------------------------------------------

def _cell_probabilities(h: float, k: float, rho: float) -> tuple[float, float, float, float]:
    # (p00, p01, p10, p11); first index is the x item, h/k its thresholds.
    p00 = bivariate_normal_cdf(h, k, rho)
    ph = _phi(h)
    pk = _phi(k)
    p01 = ph - p00
    p10 = pk - p00
    p11 = 1.0 - ph - pk + p00
    return p00, p01, p10, p11


def tetrachoric_pair(table: ContingencyTable2x2) -> tuple[float, float, float]:
    """Tetrachoric correlation of one 2x2 table by two-step ML.

    Thresholds are fixed at the normal quantiles of the margins; the
    correlation maximizes the four-cell likelihood via a bounded search
    on (-0.999, 0.999).

    Returns ``(rho, threshold_x, threshold_y)``.

    Raises
    ------
    UndefinedCorrelationError
        If an entire row or column of the table is empty.
    """
    n00, n01, n10, n11 = table.n00, table.n01, table.n10, table.n11
    total = table.total
    x0 = n00 + n01  # x item scored 0
    y0 = n00 + n10  # y item scored 0
    if x0 == 0 or x0 == total or y0 == 0 or y0 == total:
        raise UndefinedCorrelationError(
            f"empty margin in table ({n00}, {n01}, {n10}, {n11}); correlation undefined")
    h = float(ndtri(x0 / total))
    k = float(ndtri(y0 / total))
    counts = (n00, n01, n10, n11)

    def neg_loglik(rho: float) -> float:
        probs = _cell_probabilities(h, k, rho)
        ll = 0.0
        for c, p in zip(counts, probs):
            if c > 0:
                ll += c * math.log(max(p, 1e-300))
        return -ll

    res = minimize_scalar(neg_loglik, bounds=(-RHO_BOUND, RHO_BOUND),
                          method="bounded", options={"xatol": 1e-8})
    rho = float(min(RHO_BOUND, max(-RHO_BOUND, res.x)))
    return rho, h, k


def _pair_tables(x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    # Vectorized 2x2 counts over all column pairs of a 0/1 matrix.
    x1 = x.astype(float)
    x0 = 1.0 - x1
    n11 = x1.T @ x1
    n10 = x1.T @ x0
    n01 = x0.T @ x1
    n00 = x0.T @ x0
    return n00, n01, n10, n11


def tetrachoric_matrix(data: np.ndarray) -> CorrelationMatrix:
    """Pairwise tetrachoric correlation matrix of an n x p 0/1 matrix.

    Tables containing a zero cell get +0.5 added to every cell before
    estimation. The assembled matrix is smoothed with
    :func:`nearest_psd` so downstream solvers see a PSD input.

    Raises
    ------
    ValueError
        If entries are not all 0 or 1.
    ConstantColumnError
        If any column lacks both a 0 and a 1.
    """
    x = np.asarray(getattr(data, "values", data))
    if x.ndim != 2:
        raise ValueError(f"expected an n x p matrix, got shape {x.shape}")
    if not np.isin(x, (0, 1)).all():
        raise ValueError("tetrachoric estimation needs 0/1 data")
    p = x.shape[1]
    means = x.mean(axis=0)
    constant = np.flatnonzero((means == 0.0) | (means == 1.0))
    if constant.size:
        raise ConstantColumnError(constant)

    n00, n01, n10, n11 = _pair_tables(x)
    r = np.eye(p)
    for i in range(p):
        for j in range(i + 1, p):
            cells = (n00[i, j], n01[i, j], n10[i, j], n11[i, j])
            if min(cells) == 0:
                cells = tuple(c + 0.5 for c in cells)
            rho, _, _ = tetrachoric_pair(ContingencyTable2x2(*cells))
            r[i, j] = r[j, i] = rho
    return nearest_psd(r, kind="tetrachoric")


def nearest_psd(m: np.ndarray, kind: str = "pearson") -> CorrelationMatrix:
    """Smooth a symmetric unit-diagonal matrix to a PSD correlation matrix.

    Eigenvalues below :data:`PSD_EIGEN_FLOOR` are raised to the floor,
    the matrix is rebuilt and rescaled to a unit diagonal. Input that is
    already PSD is returned unchanged.
    """
    m = np.asarray(getattr(m, "values", m), dtype=float)
    values, vectors = sym_eigen(m)
    if values[-1] >= 0.0:
        return CorrelationMatrix(values=m, kind=kind)
    rebuilt = m
    # The unit-diagonal rescale can push the smallest eigenvalue back
    # under the floor, so alternate clip and rescale until it holds.
    for _ in range(100):
        clipped = np.maximum(values, PSD_EIGEN_FLOOR)
        rebuilt = (vectors * clipped) @ vectors.T
        d = np.sqrt(np.diag(rebuilt))
        rebuilt = rebuilt / np.outer(d, d)
        rebuilt = (rebuilt + rebuilt.T) / 2.0
        np.fill_diagonal(rebuilt, 1.0)
        values, vectors = sym_eigen(rebuilt)
        if values[-1] >= PSD_EIGEN_FLOOR - 1e-9:
            break
    return CorrelationMatrix(values=rebuilt, kind=kind)


def squared_multiple_correlations(r: np.ndarray) -> np.ndarray:
    """SMC of each item on all others, from the inverse correlation matrix.

    Near-singular input is stabilized by flooring eigenvalues at
    :data:`PSD_EIGEN_FLOOR` before inversion.
    """
    r = np.asarray(getattr(r, "values", r), dtype=float)
    values, vectors = sym_eigen(r)
    values = np.maximum(values, PSD_EIGEN_FLOOR)
    inv = (vectors / values) @ vectors.T
    return 1.0 - 1.0 / np.diag(inv)
