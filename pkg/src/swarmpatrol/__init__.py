"""Deterministic multi-robot patrol simulator with shared anomaly perception.

Robots patrol a metric graph under one of ten strategies, sense a planted
anomaly through a noisy channel, and fuse ternary beliefs whenever two of
them pass within communication range. The harness sweeps strategy x noise
matrices under derived per-run seeds and reduces each run to accuracy,
idleness, consensus and communication-connectivity metrics.
"""

from .beliefs import Belief, fuse, fuse_vectors, measurement_update
from .comms import CommConfig, CommState, eligible_pairs, exchange, tick_comms
from .graph import (
    PatrolGraph,
    Route,
    build_cyclic_route,
    generate_default_map,
    parse_map,
    serialize_map,
)
from .harness import (
    ExperimentConfig,
    RunRecord,
    SummaryRow,
    cell_seed,
    load_map,
    run_matrix,
    run_one,
    summarize,
)
from .metrics import (
    CommGraph,
    ConfusionCounts,
    ConsensusReport,
    algebraic_connectivity,
    classify,
    consensus_report,
    f_score,
    jacobi_eigenvalues,
    pearson,
    system_error,
)
from .strategies import StrategyKind, StrategyParams
from .world import IdlenessTracker, RngStream, RobotState, WorldState

__version__ = "0.1.0"

__all__ = [
    "Belief",
    "fuse",
    "fuse_vectors",
    "measurement_update",
    "CommConfig",
    "CommState",
    "eligible_pairs",
    "exchange",
    "tick_comms",
    "PatrolGraph",
    "Route",
    "build_cyclic_route",
    "generate_default_map",
    "parse_map",
    "serialize_map",
    "ExperimentConfig",
    "RunRecord",
    "SummaryRow",
    "cell_seed",
    "load_map",
    "run_matrix",
    "run_one",
    "summarize",
    "CommGraph",
    "ConfusionCounts",
    "ConsensusReport",
    "algebraic_connectivity",
    "classify",
    "consensus_report",
    "f_score",
    "jacobi_eigenvalues",
    "pearson",
    "system_error",
    "StrategyKind",
    "StrategyParams",
    "IdlenessTracker",
    "RngStream",
    "RobotState",
    "WorldState",
    "__version__",
]
