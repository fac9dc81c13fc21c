"""Seeded Monte Carlo harness over the simulation design grid.

Each replication draws one dataset, runs every requested method, and
records the estimated dimension count (or the failure). Replications
are pure functions of their seed, so any execution order or degree of
parallelism reproduces identical records.

Correlation-input convention (mirrors the study tooling): the
fit/partial-based methods (vss, map, bic, ebic) score the product-moment
matrix of the 0/1 items; pa and kaiser work from tetrachoric
correlations; ega runs its own tetrachoric network pipeline.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .baselines import (DEFAULT_KMAX, bic_select, ebic_select, kaiser_rule,
                        map_select, parallel_analysis, vss_select)
from .correlation import pearson_matrix, tetrachoric_matrix
from .datagen import (SimulationCondition, build_implied_sigma, condition_grid,
                      dichotomize, sample_dataset)
from .ega import ega

__all__ = [
    "METHODS",
    "StudyParams",
    "MethodOutcome",
    "ReplicationRecord",
    "Metrics",
    "ConditionSummary",
    "replication_seed",
    "run_replication",
    "run_condition",
    "run_study",
    "compute_metrics",
    "aggregate",
]

#: All supported retention methods, in canonical output order.
METHODS = ("vss", "map", "bic", "ebic", "pa", "kaiser", "ega")

#: Offset separating the parallel-analysis permutation stream from the
#: data-generation stream of the same replication.
_PA_SEED_OFFSET = 10 ** 12

#: Spacing of per-condition seed blocks.
_CONDITION_SEED_STRIDE = 10 ** 6


@dataclass(frozen=True)
class StudyParams:
    """Tuning knobs shared by every replication."""

    gamma: float = 0.5
    steps: int = 4
    kmax: int = DEFAULT_KMAX
    pa_iters: int = 20
    n_lambda: int = 100

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.kmax < 1 or self.steps < 1 or self.pa_iters < 1 or self.n_lambda < 2:
            raise ValueError("steps, kmax, pa_iters, n_lambda must be positive")


@dataclass(frozen=True)
class MethodOutcome:
    """Estimated dimension count, or the failure that prevented one."""

    k_hat: int | None
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.k_hat is None


@dataclass(frozen=True)
class ReplicationRecord:
    """All method outcomes for one simulated dataset."""

    condition: SimulationCondition
    rep_index: int
    seed: int
    outcomes: dict


@dataclass(frozen=True)
class Metrics:
    """Accuracy, mean bias error, mean absolute error of k estimates."""

    accuracy: float
    mbe: float
    mae: float


@dataclass(frozen=True)
class ConditionSummary:
    """Per-(condition, method) summary row; roll-up rows leave the
    aggregated-out design fields as None."""

    n_factors: int | None
    items_per_factor: int | None
    sample_size: int | None
    factor_corr: float | None
    method: str
    n_reps: int
    accuracy_mean: float
    accuracy_sd: float
    mbe_mean: float
    mbe_sd: float
    mae_mean: float
    mae_sd: float
    failure_count: int

    @property
    def condition(self) -> SimulationCondition | None:
        fields = (self.n_factors, self.items_per_factor,
                  self.sample_size, self.factor_corr)
        if any(v is None for v in fields):
            return None
        return SimulationCondition(*fields)


def replication_seed(base_seed: int, condition_index: int, rep_index: int) -> int:
    """Documented seeding scheme: base + condition_index * 10^6 + rep."""
    return base_seed + condition_index * _CONDITION_SEED_STRIDE + rep_index


def _grid_index(condition: SimulationCondition) -> int:
    # Conditions outside the canonical grid share block 0; callers that
    # sweep custom conditions should pass explicit indices instead.
    try:
        return condition_grid().index(condition)
    except ValueError:
        return 0


def _estimate_method(method: str, binary_values: np.ndarray,
                     condition: SimulationCondition, params: StudyParams,
                     seed: int) -> int:
    n = condition.sample_size
    p = binary_values.shape[1]
    if method == "ega":
        return ega(binary_values, gamma=params.gamma, steps=params.steps,
                   n_lambda=params.n_lambda).ndim
    if method == "pa":
        return parallel_analysis(binary_values, n_iter=params.pa_iters,
                                 seed=seed + _PA_SEED_OFFSET,
                                 kmax=params.kmax).k_hat
    if method == "kaiser":
        return kaiser_rule(tetrachoric_matrix(binary_values),
                           eigen_basis="factors").k_hat
    phi = pearson_matrix(binary_values.astype(float))
    if method == "bic":
        return bic_select(phi, n, kmax=params.kmax).k_hat
    if method == "ebic":
        return ebic_select(phi, n, kmax=params.kmax, gamma=params.gamma).k_hat
    if method == "vss":
        return vss_select(phi, n, kmax=params.kmax).k_hat
    if method == "map":
        return map_select(phi, kmax=min(params.kmax, p - 2)).k_hat
    raise ValueError(f"unknown method {method!r}")


def run_replication(condition: SimulationCondition, methods, seed: int,
                    params: StudyParams = StudyParams(),
                    rep_index: int = 0) -> ReplicationRecord:
    """Generate one dataset and run every requested method on it.

    A method failure is captured in its outcome; it never aborts the
    replication.
    """
    unknown = set(methods) - set(METHODS)
    if unknown:
        raise ValueError(f"unknown methods: {sorted(unknown)}")
    sigma = build_implied_sigma(condition.spec())
    binary = dichotomize(sample_dataset(sigma, condition.sample_size, seed))
    outcomes = {}
    for method in methods:
        try:
            k_hat = _estimate_method(method, binary.values, condition, params, seed)
            outcomes[method] = MethodOutcome(k_hat=int(k_hat))
        except Exception as exc:  # failure policy: record, never abort
            outcomes[method] = MethodOutcome(
                k_hat=None, error=f"{type(exc).__name__}: {exc}")
    return ReplicationRecord(condition=condition, rep_index=rep_index,
                             seed=seed, outcomes=outcomes)


def run_condition(condition: SimulationCondition, methods, reps: int,
                  base_seed: int, params: StudyParams = StudyParams(),
                  condition_index: int | None = None) -> list[ReplicationRecord]:
    """Run ``reps`` seeded replications of one design cell."""
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    if condition_index is None:
        condition_index = _grid_index(condition)
    records = []
    for rep in range(reps):
        seed = replication_seed(base_seed, condition_index, rep)
        records.append(run_replication(condition, methods, seed, params, rep_index=rep))
    return records


def _study_task(args):
    condition, methods, rep, seed, params = args
    return run_replication(condition, methods, seed, params, rep_index=rep)


def run_study(conditions, methods, reps: int, base_seed: int,
              params: StudyParams = StudyParams(),
              workers: int = 1) -> list[ReplicationRecord]:
    """Run the full study, optionally fanning replications out to
    worker processes. Output order is canonical (condition, then rep)
    regardless of scheduling."""
    conditions = list(conditions)
    tasks = []
    for condition in conditions:
        index = _grid_index(condition)
        for rep in range(reps):
            seed = replication_seed(base_seed, index, rep)
            tasks.append((condition, tuple(methods), rep, seed, params))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_study_task, tasks, chunksize=1))
    else:
        records = [_study_task(t) for t in tasks]
    records.sort(key=lambda r: (conditions.index(r.condition), r.rep_index))
    return records


def compute_metrics(estimates, true_k: int) -> Metrics:
    """Accuracy / mean bias / mean absolute error of a list of k_hat.

    ``None`` entries mark failed replications: they count against
    accuracy but are excluded from the bias means. With no successful
    estimate at all, MBE/MAE are NaN (the undefined-metrics marker).
    """
    estimates = list(estimates)
    if not estimates:
        raise ValueError("need at least one estimate")
    hits = sum(1 for e in estimates if e is not None and e == true_k)
    accuracy = hits / len(estimates)
    valid = [e for e in estimates if e is not None]
    if not valid:
        return Metrics(accuracy=accuracy, mbe=math.nan, mae=math.nan)
    bias = [e - true_k for e in valid]
    return Metrics(accuracy=accuracy,
                   mbe=sum(bias) / len(bias),
                   mae=sum(abs(b) for b in bias) / len(bias))


def _sd(values) -> float:
    arr = np.asarray([v for v in values], dtype=float)
    if arr.size <= 1:
        return 0.0 if arr.size == 1 else math.nan
    return float(np.std(arr, ddof=1))


def _summarize(key_fields: dict, method: str, pairs) -> ConditionSummary:
    # pairs: [(k_hat_or_None, true_k)] pooled over the group's replications.
    pairs = list(pairs)
    indicator = [1.0 if k is not None and k == true_k else 0.0 for k, true_k in pairs]
    bias = [k - true_k for k, true_k in pairs if k is not None]
    failures = sum(1 for k, _ in pairs if k is None)
    metrics = compute_metrics([k for k, _ in pairs], pairs[0][1]) \
        if len({t for _, t in pairs}) == 1 else None
    if metrics is not None:
        accuracy_mean, mbe_mean, mae_mean = metrics.accuracy, metrics.mbe, metrics.mae
    else:
        accuracy_mean = sum(indicator) / len(indicator)
        mbe_mean = sum(bias) / len(bias) if bias else math.nan
        mae_mean = sum(abs(b) for b in bias) / len(bias) if bias else math.nan
    return ConditionSummary(
        n_factors=key_fields.get("n_factors"),
        items_per_factor=key_fields.get("items_per_factor"),
        sample_size=key_fields.get("sample_size"),
        factor_corr=key_fields.get("factor_corr"),
        method=method,
        n_reps=len(pairs),
        accuracy_mean=accuracy_mean,
        accuracy_sd=_sd(indicator),
        mbe_mean=mbe_mean,
        mbe_sd=_sd(bias),
        mae_mean=mae_mean,
        mae_sd=_sd([abs(b) for b in bias]),
        failure_count=failures,
    )


def aggregate(records, rollups: bool = False) -> list[ConditionSummary]:
    """Summarize records per (condition, method).

    With ``rollups=True``, adds the aggregate rows the study tables
    print in bold: per correlation level, per (correlation, sample
    size), and a per-factor-count total, each pooled over their
    constituent cells (so roll-up means are rep-count weighted).
    """
    records = list(records)
    if not records:
        return []
    methods = []
    for record in records:
        for m in record.outcomes:
            if m not in methods:
                methods.append(m)

    def pool(predicate):
        grouped = {m: [] for m in methods}
        for record in records:
            if not predicate(record.condition):
                continue
            for m, outcome in record.outcomes.items():
                grouped[m].append((outcome.k_hat, record.condition.n_factors))
        return grouped

    rows = []
    cells = sorted({r.condition for r in records})
    for cond in cells:
        grouped = pool(lambda c, cond=cond: c == cond)
        for m in methods:
            if grouped[m]:
                rows.append(_summarize({
                    "n_factors": cond.n_factors,
                    "items_per_factor": cond.items_per_factor,
                    "sample_size": cond.sample_size,
                    "factor_corr": cond.factor_corr,
                }, m, grouped[m]))
    if not rollups:
        return rows

    factor_levels = sorted({c.n_factors for c in cells})
    for nf in factor_levels:
        for corr in sorted({c.factor_corr for c in cells if c.n_factors == nf}):
            grouped = pool(lambda c: c.n_factors == nf and c.factor_corr == corr)
            for m in methods:
                if grouped[m]:
                    rows.append(_summarize(
                        {"n_factors": nf, "factor_corr": corr}, m, grouped[m]))
            for size in sorted({c.sample_size for c in cells
                                if c.n_factors == nf and c.factor_corr == corr}):
                grouped = pool(lambda c: (c.n_factors == nf and c.factor_corr == corr
                                          and c.sample_size == size))
                for m in methods:
                    if grouped[m]:
                        rows.append(_summarize(
                            {"n_factors": nf, "factor_corr": corr,
                             "sample_size": size}, m, grouped[m]))
        grouped = pool(lambda c: c.n_factors == nf)
        for m in methods:
            if grouped[m]:
                rows.append(_summarize({"n_factors": nf}, m, grouped[m]))
    return rows
