"""Time-dependent nonnegative latent-attribute models for road-network traffic.

Learn per-vertex latent attributes from partially observed speed snapshots,
complete missing readings, forecast ahead through a learned transition, and
fold streaming feedback in with cheap topology-aware per-vertex updates.
"""

from .baselines import knn_complete
from .errors import ConfigError, DataError
from .experiments import (
    ExperimentReport,
    bench_incremental_speedup,
    run_completion_experiment,
    run_online_forecast,
    run_prediction_experiment,
)
from .global_learning import (
    GlobalLearnResult,
    global_learn,
    step_interaction,
    step_latent,
    step_transition,
)
from .incremental import (
    CandidateSet,
    adjust_vertex,
    incremental_learn,
    incremental_update,
    select_candidates,
)
from .metrics import mape, rmse
from .model import (
    Hyperparams,
    LatentState,
    evaluate_objective,
    gradient_wrt_latent,
    load_state,
    predict_ahead,
    predict_on_edges,
    reconstruct_on_edges,
    reconstruct_snapshot,
    save_state,
)
from .network import (
    LaplacianTriple,
    RoadNetwork,
    SccOrdering,
    build_proximity_laplacian,
    condense_scc,
    update_ordering,
)
from .snapshots import (
    HoldoutMask,
    ReadingRecord,
    SnapshotSeries,
    build_snapshot_series,
    mask_holdout,
)
from .synthetic import generate_synthetic

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DataError",
    "RoadNetwork",
    "LaplacianTriple",
    "SccOrdering",
    "build_proximity_laplacian",
    "condense_scc",
    "update_ordering",
    "SnapshotSeries",
    "ReadingRecord",
    "HoldoutMask",
    "build_snapshot_series",
    "mask_holdout",
    "Hyperparams",
    "LatentState",
    "reconstruct_snapshot",
    "reconstruct_on_edges",
    "predict_ahead",
    "predict_on_edges",
    "evaluate_objective",
    "gradient_wrt_latent",
    "save_state",
    "load_state",
    "global_learn",
    "GlobalLearnResult",
    "step_latent",
    "step_interaction",
    "step_transition",
    "CandidateSet",
    "select_candidates",
    "adjust_vertex",
    "incremental_update",
    "incremental_learn",
    "generate_synthetic",
    "mape",
    "rmse",
    "knn_complete",
    "ExperimentReport",
    "run_completion_experiment",
    "run_prediction_experiment",
    "run_online_forecast",
    "bench_incremental_speedup",
]
