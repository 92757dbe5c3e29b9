"""Identity testing of symmetric Markov chains from a single trajectory."""

from .chain import (
    InfiniteWord, Trajectory, escape_count, hitting_time_exact, observed_chain,
    restrict_trajectory, simulate,
)
from .config import DEFAULT_CONSTANTS, Constants, ExperimentConfig
from .embed import bourgain_embed, find_comp, l1_to_cuts
from .errors import MCIDError
from .kernels import BACKEND
from .linalg import (
    Distribution, StateSubset, StochasticMatrix, chain_distance, cut_value, expansion,
    hellinger_sq, internal_mass_ratio, spectral_radius, total_variation,
)
from .lp import LinearProgram, Metric, solve_lp, solve_metric
from .partition import Partition, extract_component, partition_graph
from .testing import (
    ETA, EdgeDistribution, GenerationFailed, SampleSet, Verdict, edge_distribution,
    generate_iid_samples, identity_test_chain, identity_test_iid,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Constants", "DEFAULT_CONSTANTS", "Distribution", "ETA", "EdgeDistribution",
    "ExperimentConfig", "GenerationFailed", "InfiniteWord", "LinearProgram", "MCIDError", "Metric",
    "Partition", "SampleSet", "StateSubset", "StochasticMatrix", "Trajectory", "Verdict",
    "bourgain_embed", "chain_distance", "cut_value", "edge_distribution", "escape_count",
    "expansion", "extract_component", "find_comp", "generate_iid_samples", "hellinger_sq",
    "hitting_time_exact", "identity_test_chain", "identity_test_iid", "internal_mass_ratio",
    "l1_to_cuts", "observed_chain", "partition_graph", "restrict_trajectory", "simulate",
    "solve_lp", "solve_metric", "spectral_radius", "total_variation",
]
