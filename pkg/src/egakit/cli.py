"""Command-line interface: fit, simulate, compare.

Exit codes: 0 success, 2 input error, 3 data-quality error, 4 numerical
non-convergence. Output files are written only after all computation
succeeds, so a failing invocation leaves no partial output.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from .baselines import (bic_select, ebic_select, kaiser_rule, map_select,
                        parallel_analysis, vss_select)
from .correlation import pearson_matrix, tetrachoric_matrix
from .datagen import SimulationCondition, condition_grid
from .ega import ega
from .exceptions import (DataQualityError, EgakitError, InputError,
                         NonConvergenceError)
from .simstudy import METHODS, StudyParams, aggregate, run_study

SUMMARY_COLUMNS = ("n_factors", "items_per_factor", "n", "corr", "method",
                   "n_reps", "acc_mean", "acc_sd", "mbe_mean", "mbe_sd",
                   "mae_mean", "mae_sd", "failures")

_FIT_METHODS = ("ega", "pa", "kaiser", "bic", "ebic", "vss", "map")


def _fmt(value) -> str:
    # Canonical cell text: empty for missing/NaN, repr for floats.
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return repr(value)
    return str(value)


def load_csv_matrix(path: str) -> tuple[list[str], np.ndarray]:
    """Read an observations x items CSV with a header of item names.

    Raises
    ------
    InputError
        On a missing file, empty file, ragged rows, or non-numeric
        cells (the message pinpoints row and column).
    """
    if not os.path.exists(path):
        raise InputError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: file is empty") from None
        labels = [h.strip() for h in header]
        rows = []
        for row_number, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(labels):
                raise InputError(
                    f"{path}: row {row_number} has {len(row)} cells, expected {len(labels)}")
            values = []
            for col, cell in enumerate(row):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise InputError(
                        f"{path}: row {row_number}, column {labels[col]!r}: "
                        f"non-numeric cell {cell!r}") from None
            rows.append(values)
    if not rows:
        raise InputError(f"{path}: no data rows")
    return labels, np.asarray(rows)


def _statistics_payload(stats: dict) -> dict:
    payload = {}
    for name, values in stats.items():
        payload[name] = [None if isinstance(v, float) and math.isnan(v) else float(v)
                         for v in np.asarray(values, dtype=float)]
    return payload


def cmd_fit(args) -> int:
    labels, values = load_csv_matrix(args.data)
    n, p = values.shape
    binary = bool(np.isin(values, (0, 1)).all())
    prefix = args.out_prefix
    if prefix is None:
        prefix = os.path.splitext(os.path.basename(args.data))[0] + f".{args.method}"

    payload = {"method": args.method, "n_obs": int(n), "n_items": int(p)}
    edges = None
    if args.method == "ega":
        result = ega(values, gamma=args.gamma, steps=args.steps,
                     item_labels=labels, n_lambda=args.n_lambda)
        payload.update({
            "ndim": result.ndim,
            "selected_lambda": float(result.network.selected_lambda),
            "ebic": float(result.network.ebic),
            "dim_variables": [{"item": item, "dimension": dim}
                              for item, dim in result.dim_variables],
        })
        edges = [(labels[i], labels[j], result.network.weights[i, j])
                 for i, j in sorted(result.network.edges)]
    elif args.method == "pa":
        estimate = parallel_analysis(values.astype(np.int8) if binary else values,
                                     n_iter=args.pa_iters, seed=args.seed,
                                     kmax=args.kmax)
        payload.update({"k_hat": estimate.k_hat,
                        "statistics": _statistics_payload(estimate.statistics)})
    elif args.method == "kaiser":
        corr = tetrachoric_matrix(values.astype(np.int8)) if binary \
            else pearson_matrix(values)
        estimate = kaiser_rule(corr, eigen_basis="factors")
        payload.update({"k_hat": estimate.k_hat,
                        "statistics": _statistics_payload(estimate.statistics)})
    else:
        corr = pearson_matrix(values)
        if args.method == "bic":
            estimate = bic_select(corr, n, kmax=args.kmax)
        elif args.method == "ebic":
            estimate = ebic_select(corr, n, kmax=args.kmax, gamma=args.gamma)
        elif args.method == "vss":
            estimate = vss_select(corr, n, kmax=args.kmax)
        else:
            estimate = map_select(corr, kmax=min(args.kmax, p - 2))
        payload.update({"k_hat": estimate.k_hat,
                        "statistics": _statistics_payload(estimate.statistics)})

    json_path = prefix + ".json"
    with open(json_path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")
    if edges is not None:
        edges_path = prefix + "_edges.csv"
        with open(edges_path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(("item_i", "item_j", "weight"))
            for i, j, weight in edges:
                writer.writerow((i, j, _fmt(float(weight))))
        print(f"wrote {json_path} and {edges_path}")
    else:
        print(f"wrote {json_path}")
    return 0


@dataclass
class RunConfig:
    """Validated simulate configuration."""

    conditions: list
    reps: int
    base_seed: int
    methods: tuple
    params: StudyParams
    workers: int
    rollups: bool
    out_csv: str
    out_manifest: str


def _config_error(path: str, message: str):
    raise InputError(f"config field {path}: {message}")


def _parse_conditions(args, config: dict) -> list:
    if args.grid == "paper":
        return condition_grid()
    raw = config.get("conditions")
    if raw is not None:
        conditions = []
        for index, entry in enumerate(raw):
            for key in ("n_factors", "items_per_factor", "sample_size", "factor_corr"):
                if key not in entry:
                    _config_error(f"conditions[{index}].{key}", "missing")
            try:
                conditions.append(SimulationCondition(
                    n_factors=int(entry["n_factors"]),
                    items_per_factor=int(entry["items_per_factor"]),
                    sample_size=int(entry["sample_size"]),
                    factor_corr=float(entry["factor_corr"])))
            except (TypeError, ValueError) as exc:
                _config_error(f"conditions[{index}]", str(exc))
        return conditions
    if None in (args.factors, args.items, args.n):
        raise InputError(
            "specify a condition with --factors/--items/--n/--corr, "
            "a config with conditions, or --grid paper")
    return [SimulationCondition(n_factors=args.factors, items_per_factor=args.items,
                                sample_size=args.n, factor_corr=args.corr)]


def build_run_config(args) -> RunConfig:
    config = {}
    if args.config:
        if not os.path.exists(args.config):
            raise InputError(f"no such config file: {args.config}")
        with open(args.config, encoding="utf-8") as handle:
            try:
                config = json.load(handle)
            except json.JSONDecodeError as exc:
                raise InputError(f"config is not valid JSON: {exc}") from exc

    def pick(flag_value, key, default):
        if flag_value is not None:
            return flag_value
        return config.get(key, default)

    reps = int(pick(args.reps, "reps", 10))
    if reps < 1:
        _config_error("reps", f"must be >= 1, got {reps}")
    base_seed = int(pick(args.seed, "base_seed", 0))
    methods = pick(args.methods, "methods", list(METHODS))
    if isinstance(methods, str):
        methods = [m.strip() for m in methods.split(",") if m.strip()]
    unknown = set(methods) - set(METHODS)
    if unknown:
        _config_error("methods", f"unknown methods {sorted(unknown)}; "
                                 f"choose from {list(METHODS)}")
    gamma = float(pick(args.gamma, "gamma", 0.5))
    if gamma < 0:
        _config_error("gamma", f"must be >= 0, got {gamma}")
    try:
        params = StudyParams(gamma=gamma,
                             steps=int(pick(args.steps, "steps", 4)),
                             kmax=int(pick(args.kmax, "kmax", 10)),
                             pa_iters=int(pick(args.pa_iters, "pa_iters", 20)),
                             n_lambda=int(pick(args.n_lambda, "n_lambda", 100)))
    except ValueError as exc:
        _config_error("parameters", str(exc))
    workers = args.workers
    if workers is None:
        workers = int(config.get("workers", os.environ.get("EGAKIT_WORKERS", 1)))
    if workers < 1:
        _config_error("workers", f"must be >= 1, got {workers}")
    output = config.get("output", {})
    out_csv = pick(args.out_csv, None, None) or output.get("csv", "simulation_summary.csv")
    out_manifest = (pick(args.out_manifest, None, None)
                    or output.get("manifest", "simulation_manifest.json"))
    return RunConfig(conditions=_parse_conditions(args, config), reps=reps,
                     base_seed=base_seed, methods=tuple(methods), params=params,
                     workers=workers, rollups=bool(args.rollups or config.get("rollups")),
                     out_csv=out_csv, out_manifest=out_manifest)


def _summary_row(summary) -> tuple:
    return (_fmt(summary.n_factors), _fmt(summary.items_per_factor),
            _fmt(summary.sample_size), _fmt(summary.factor_corr), summary.method,
            _fmt(summary.n_reps), _fmt(summary.accuracy_mean), _fmt(summary.accuracy_sd),
            _fmt(summary.mbe_mean), _fmt(summary.mbe_sd), _fmt(summary.mae_mean),
            _fmt(summary.mae_sd), _fmt(summary.failure_count))


def _write_summary_csv(path: str, summaries) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(SUMMARY_COLUMNS)
        for summary in summaries:
            writer.writerow(_summary_row(summary))


def cmd_simulate(args) -> int:
    config = build_run_config(args)
    started = time.perf_counter()
    records = run_study(config.conditions, config.methods, config.reps,
                        config.base_seed, params=config.params,
                        workers=config.workers)
    cells = [s for s in aggregate(records)
             if s.method in config.methods]
    order = {m: i for i, m in enumerate(METHODS)}
    cells.sort(key=lambda s: (s.condition, order[s.method]))
    _write_summary_csv(config.out_csv, cells)

    rollup_csv = None
    if config.rollups:
        rollup_csv = os.path.splitext(config.out_csv)[0] + "_rollups.csv"
        rollups = [s for s in aggregate(records, rollups=True) if s.condition is None]
        _write_summary_csv(rollup_csv, rollups)

    wall = time.perf_counter() - started
    manifest = {
        "base_seed": config.base_seed,
        "reps": config.reps,
        "methods": list(config.methods),
        "conditions": [{"n_factors": c.n_factors, "items_per_factor": c.items_per_factor,
                        "sample_size": c.sample_size, "factor_corr": c.factor_corr}
                       for c in config.conditions],
        "parameters": {"gamma": config.params.gamma, "steps": config.params.steps,
                       "kmax": config.params.kmax, "pa_iters": config.params.pa_iters,
                       "n_lambda": config.params.n_lambda, "workers": config.workers},
        "wall_time_seconds": wall,
        "summary_csv": config.out_csv,
        "rollup_csv": rollup_csv,
        "n_rows": len(cells),
    }
    with open(config.out_manifest, "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")
    print(f"wrote {config.out_csv} ({len(cells)} rows) and {config.out_manifest}")
    return 0


def cmd_compare(args) -> int:
    labels, values = load_csv_matrix(args.data)
    n, p = values.shape
    kmax = args.kmax
    binary = bool(np.isin(values, (0, 1)).all())

    phi = pearson_matrix(values)
    vss = vss_select(phi, n, kmax=kmax)
    map_est = map_select(phi, kmax=min(kmax, p - 2))
    bic = bic_select(phi, n, kmax=kmax)
    ebic = ebic_select(phi, n, kmax=kmax, gamma=args.gamma)
    latent = tetrachoric_matrix(values.astype(np.int8)) if binary else phi
    pa = parallel_analysis(values.astype(np.int8) if binary else values,
                           n_iter=args.pa_iters, seed=args.seed, kmax=kmax)
    kaiser = kaiser_rule(latent, eigen_basis="factors")

    prefix = args.out_prefix
    if prefix is None:
        prefix = os.path.splitext(os.path.basename(args.data))[0] + ".compare"
    table_path = prefix + ".csv"
    kaiser_values = kaiser.statistics["eigenvalues"][:kmax]
    with open(table_path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(("k", "vss", "map", "bic", "ebic",
                         "kaiser_eigenvalue", "pa_observed", "pa_reference"))
        for k in range(1, kmax + 1):
            writer.writerow((
                k,
                _fmt(float(vss.statistics["vss"][k - 1])),
                _fmt(float(map_est.statistics["map"][k - 1])
                     if k - 1 < map_est.statistics["map"].size else math.nan),
                _fmt(float(bic.statistics["bic"][k - 1])),
                _fmt(float(ebic.statistics["ebic"][k - 1])),
                _fmt(float(kaiser_values[k - 1]) if k - 1 < kaiser_values.size else math.nan),
                _fmt(float(pa.statistics["observed"][k - 1])
                     if k - 1 < pa.statistics["observed"].size else math.nan),
                _fmt(float(pa.statistics["reference"][k - 1])
                     if k - 1 < pa.statistics["reference"].size else math.nan),
            ))
    payload = {
        "kmax": kmax, "n_obs": int(n), "n_items": int(p),
        "k_hat": {"vss": vss.k_hat, "map": map_est.k_hat, "bic": bic.k_hat,
                  "ebic": ebic.k_hat, "pa": pa.k_hat, "kaiser": kaiser.k_hat},
        "table_csv": table_path,
    }
    json_path = prefix + ".json"
    with open(json_path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")
    print(f"wrote {table_path} and {json_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="egakit",
        description="Dimensionality estimation: network communities and "
                    "classical factor-retention rules.")
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="estimate dimensions for one dataset CSV")
    fit.add_argument("data", help="CSV with a header row of item names")
    fit.add_argument("--method", choices=_FIT_METHODS, default="ega")
    fit.add_argument("--gamma", type=float, default=0.5)
    fit.add_argument("--steps", type=int, default=4)
    fit.add_argument("--kmax", type=int, default=10)
    fit.add_argument("--n-lambda", type=int, default=100, dest="n_lambda")
    fit.add_argument("--pa-iters", type=int, default=20, dest="pa_iters")
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--out-prefix", default=None,
                     help="output prefix (default: data stem + method)")
    fit.set_defaults(func=cmd_fit)

    sim = sub.add_parser("simulate", help="run a seeded simulation study")
    sim.add_argument("--config", default=None, help="JSON config file")
    sim.add_argument("--grid", choices=["paper"], default=None,
                     help="run the full 64-condition design grid")
    sim.add_argument("--factors", type=int, default=None)
    sim.add_argument("--items", type=int, default=None)
    sim.add_argument("--n", type=int, default=None)
    sim.add_argument("--corr", type=float, default=0.0)
    sim.add_argument("--reps", type=int, default=None)
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--methods", default=None,
                     help="comma-separated subset of " + ",".join(METHODS))
    sim.add_argument("--gamma", type=float, default=None)
    sim.add_argument("--n-lambda", type=int, default=None, dest="n_lambda")
    sim.add_argument("--steps", type=int, default=None)
    sim.add_argument("--kmax", type=int, default=None)
    sim.add_argument("--pa-iters", type=int, default=None, dest="pa_iters")
    sim.add_argument("--workers", type=int, default=None,
                     help="worker processes (default: $EGAKIT_WORKERS or 1)")
    sim.add_argument("--rollups", action="store_true",
                     help="also write the aggregate (bold-row) summaries")
    sim.add_argument("--out-csv", default=None, dest="out_csv")
    sim.add_argument("--out-manifest", default=None, dest="out_manifest")
    sim.set_defaults(func=cmd_simulate)

    cmp_parser = sub.add_parser(
        "compare", help="per-method statistics for k = 1..kmax on one dataset")
    cmp_parser.add_argument("data")
    cmp_parser.add_argument("--kmax", type=int, default=10)
    cmp_parser.add_argument("--gamma", type=float, default=0.5)
    cmp_parser.add_argument("--pa-iters", type=int, default=20, dest="pa_iters")
    cmp_parser.add_argument("--seed", type=int, default=0)
    cmp_parser.add_argument("--out-prefix", default=None)
    cmp_parser.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataQualityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except NonConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except EgakitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
