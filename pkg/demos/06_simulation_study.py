# A desk-scale slice of the Monte Carlo study: seeded, parallelizable,
# byte-reproducible.
#
# Full-scale runs go through the CLI (`egakit simulate --grid paper`);
# this script runs two design cells in-process and prints the
# accuracy / bias / absolute-error summary per method.

from egakit import (METHODS, SimulationCondition, StudyParams, aggregate,
                    compute_metrics, run_study)

conditions = [
    SimulationCondition(2, 5, 500, 0.0),
    SimulationCondition(2, 5, 500, 0.7),
]
params = StudyParams()  # gamma 0.5, 4-step walks, kmax 10, 20 PA iterations

records = run_study(conditions, METHODS, reps=5, base_seed=11, params=params)

print(f"{len(records)} replications "
      f"({len(conditions)} conditions x 5 reps), methods: {', '.join(METHODS)}")
print("\ncondition            method   acc    mbe    mae  failures")
for row in aggregate(records):
    cond = row.condition
    print(f"({cond.n_factors},{cond.items_per_factor},{cond.sample_size},"
          f"{cond.factor_corr})".ljust(20)
          + f" {row.method:7s}{row.accuracy_mean:5.2f}  "
            f"{row.mbe_mean:+.2f}  {row.mae_mean:5.2f}  {row.failure_count}")

# The metrics helper on its own: under- and overfactoring cancel in the
# signed bias but not in the absolute error.
metrics = compute_metrics([1, 3], true_k=2)
print(f"\ncompute_metrics([1, 3], 2) -> accuracy {metrics.accuracy}, "
      f"mbe {metrics.mbe}, mae {metrics.mae}")
