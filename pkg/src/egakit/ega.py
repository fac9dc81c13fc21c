"""End-to-end dimensionality estimation from raw item data.

Pipeline: correlation matrix (tetrachoric for 0/1 data, Pearson
otherwise) -> EBIC-selected graphical LASSO network -> random-walk
communities of the absolute partial correlations. The number of
communities is the estimated number of dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .correlation import CorrelationMatrix, pearson_matrix, tetrachoric_matrix
from .exceptions import EgakitError
from .ggm import PartialNetwork, ebic_glasso
from .walktrap import CommunityPartition, WeightedGraph, walktrap_communities

__all__ = ["EgaResult", "ega"]


@dataclass(frozen=True)
class EgaResult:
    """Everything the pipeline estimated for one dataset."""

    ndim: int
    correlation: CorrelationMatrix
    network: PartialNetwork
    membership: np.ndarray
    dim_variables: tuple
    items: tuple
    communities: CommunityPartition | None = None


def _is_binary(x: np.ndarray) -> bool:
    return bool(np.isin(x, (0, 1)).all())


def _with_stage(exc: EgakitError, stage: str) -> EgakitError:
    # Prefix the failing pipeline stage while keeping the exception
    # object (and its type/attributes) intact for callers that dispatch
    # on them.
    exc.args = (f"{stage}: {exc}",) + exc.args[1:]
    return exc


def ega(data, gamma: float = 0.5, steps: int = 4, correlation: str = "auto",
        item_labels=None, n_lambda: int = 100) -> EgaResult:
    """Estimate the number of dimensions and the item memberships.

    ``correlation`` picks the first pipeline stage: "auto" uses the
    tetrachoric estimator when every value is 0 or 1 and Pearson
    otherwise; "tetrachoric" and "pearson" force the choice.

    A dataset of mutually independent items yields an empty network, so
    every item lands in its own singleton dimension and ``ndim == p``.

    Raises
    ------
    ValueError
        For shape problems or fewer than 3 rows / 2 columns.
    EgakitError
        Propagated from the correlation, network, or community stage,
        annotated with the failing stage.
    """
    x = np.asarray(getattr(data, "values", data))
    if x.ndim != 2:
        raise ValueError(f"expected an n x p matrix, got shape {x.shape}")
    n, p = x.shape
    if n < 3:
        raise ValueError(f"need at least 3 observations, got {n}")
    if p < 2:
        raise ValueError(f"need at least 2 items, got {p}")
    if correlation not in ("auto", "tetrachoric", "pearson"):
        raise ValueError(f"unknown correlation mode {correlation!r}")
    if item_labels is None:
        item_labels = tuple(f"V{i + 1}" for i in range(p))
    else:
        item_labels = tuple(item_labels)
        if len(item_labels) != p:
            raise ValueError("item_labels length must match the number of columns")

    kind = correlation
    if kind == "auto":
        kind = "tetrachoric" if _is_binary(x) else "pearson"
    try:
        if kind == "tetrachoric":
            corr = tetrachoric_matrix(x)
        else:
            corr = pearson_matrix(x)
    except EgakitError as exc:
        raise _with_stage(exc, "correlation stage")

    try:
        network = ebic_glasso(corr, n=n, gamma=gamma, n_lambda=n_lambda)
    except EgakitError as exc:
        raise _with_stage(exc, "network stage")

    graph = WeightedGraph(adjacency=np.abs(network.weights), node_labels=item_labels)
    try:
        partition = walktrap_communities(graph, steps=steps)
    except EgakitError as exc:
        raise _with_stage(exc, "community stage")

    dim_variables = tuple(
        (label, int(dim)) for label, dim in zip(item_labels, partition.membership))
    return EgaResult(ndim=partition.n_communities, correlation=corr,
                     network=network, membership=partition.membership,
                     dim_variables=dim_variables, items=item_labels,
                     communities=partition)
