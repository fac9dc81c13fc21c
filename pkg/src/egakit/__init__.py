"""Dimensionality estimation for item-level data.

The core pipeline estimates the number of latent dimensions as the
community count of a regularized partial-correlation network; six
classical factor-retention rules and a seeded Monte Carlo harness ride
along for comparison studies.
"""

from .baselines import (EfaFit, RetentionEstimate, bic_select, ebic_select,
                        fit_efa, kaiser_rule, map_select, parallel_analysis,
                        varimax, vss_select)
from .correlation import (ContingencyTable2x2, CorrelationMatrix,
                          bivariate_normal_cdf, nearest_psd, pearson_matrix,
                          sym_eigen, tetrachoric_matrix, tetrachoric_pair)
from .datagen import (BinaryDataset, ContinuousDataset, FactorSpec,
                      SimulationCondition, build_implied_sigma, condition_grid,
                      dichotomize, sample_dataset)
from .ega import EgaResult, ega
from .ggm import (LambdaPath, PartialNetwork, PrecisionMatrix, ebic_glasso,
                  ebic_score, glasso, lambda_path)
from .simstudy import (METHODS, ConditionSummary, Metrics, ReplicationRecord,
                       StudyParams, aggregate, compute_metrics, run_condition,
                       run_replication, run_study)
from .walktrap import (CommunityPartition, WeightedGraph, modularity,
                       walktrap_communities)

__version__ = "0.1.0"

__all__ = [
    "BinaryDataset", "CommunityPartition", "ConditionSummary",
    "ContingencyTable2x2", "ContinuousDataset", "CorrelationMatrix",
    "EfaFit", "EgaResult", "FactorSpec", "LambdaPath", "METHODS", "Metrics",
    "PartialNetwork", "PrecisionMatrix", "ReplicationRecord",
    "RetentionEstimate", "SimulationCondition", "StudyParams",
    "WeightedGraph", "aggregate", "bic_select", "bivariate_normal_cdf",
    "build_implied_sigma", "compute_metrics", "condition_grid", "dichotomize",
    "ebic_glasso", "ebic_score", "ebic_select", "ega", "fit_efa", "glasso",
    "kaiser_rule", "lambda_path", "map_select", "modularity", "nearest_psd",
    "parallel_analysis", "pearson_matrix", "run_condition", "run_replication",
    "run_study", "sample_dataset", "sym_eigen", "tetrachoric_matrix",
    "tetrachoric_pair", "varimax", "vss_select", "walktrap_communities",
]
