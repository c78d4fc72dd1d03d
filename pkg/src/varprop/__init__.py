"""Graph-based semi-supervised label propagation with variance-regularized solvers.

Build a sparse similarity graph (or load one), clamp or source a handful
of labeled nodes, and propagate: ``laplace``, ``poisson``, and their
variance-regularized counterparts ``v_laplace`` and ``v_poisson``.
Includes a dense reference solver, a 1-D discretization consistency
checker, dataset loaders, a seeded benchmark harness, and a CLI
(``varprop``).
"""

from .bench import TrialReport, accuracy_on_unlabeled, emit_table, run_trials
from .continuum import (
    ContinuumConfig,
    PathGraphReport,
    RefinementReport,
    ResidualStats,
    discrete_vs_continuum,
    ode_residual_check,
    residual_refinement_ratio,
    second_difference,
)
from .data import (
    Dataset,
    derive_trial_seed,
    load_feature_dataset,
    load_graph_dataset,
    sample_label_set,
    with_knn_graph,
)
from .graph import (
    Graph,
    LabelSet,
    build_knn_graph,
    graph_from_edges,
    laplacian_apply,
    objective_value,
    read_edgelist,
    variance,
    weighted_mean,
    write_edgelist,
)
from .solvers import (
    METHODS,
    SolveResult,
    SolverConfig,
    dense_oracle_solve,
    estimate_stability_limit,
    laplace_solve,
    poisson_solve,
    predict,
    solve,
    v_laplace_solve,
    v_poisson_solve,
)
from .synth import make_cluster_dataset

__version__ = "0.1.0"

__all__ = [
    "METHODS",
    "ContinuumConfig",
    "Dataset",
    "Graph",
    "LabelSet",
    "PathGraphReport",
    "RefinementReport",
    "ResidualStats",
    "SolveResult",
    "SolverConfig",
    "TrialReport",
    "accuracy_on_unlabeled",
    "build_knn_graph",
    "dense_oracle_solve",
    "derive_trial_seed",
    "discrete_vs_continuum",
    "emit_table",
    "estimate_stability_limit",
    "graph_from_edges",
    "laplace_solve",
    "laplacian_apply",
    "load_feature_dataset",
    "load_graph_dataset",
    "make_cluster_dataset",
    "objective_value",
    "ode_residual_check",
    "poisson_solve",
    "predict",
    "read_edgelist",
    "residual_refinement_ratio",
    "run_trials",
    "sample_label_set",
    "second_difference",
    "solve",
    "v_laplace_solve",
    "v_poisson_solve",
    "variance",
    "weighted_mean",
    "with_knn_graph",
    "write_edgelist",
]
