"""Collective-memory formation on temporal conversation networks."""

from .netcore import (
    CliquePartition,
    Condition,
    TemporalNetwork,
    build_experiment_network,
    static_union,
    validate,
)
from .reach import (
    ModelParams,
    ReachabilityMatrix,
    aggregate_reachability,
    influence_trajectory,
    mnemonic_reachability,
    reachability_bruteforce,
)

__version__ = "0.1.0"
