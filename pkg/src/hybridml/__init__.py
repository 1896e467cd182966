"""Tree-partition estimation of Bayesian marginal likelihoods, with baselines and a benchmark zoo."""
from .baselines import (BridgeConfig, BridgeNotConverged, CameConfig, EstimatorResult, bridge_sampling, came,
                        harmonic_mean, warp_bridge_sampling)
from .graph import DecomposableGraph, NotDecomposableError
from .hybrid import (ApproximationDiagnostics, HybridConfig, HybridEstimate, RepresentativeRule, cell_log_mass,
                     hybrid_log_ml, interpolation_bound_report, representative_log_value)
from .partition import (Cell, DyadicPartition, LabeledSample, RegressionTree, TreeConfig, bounding_box,
                        extract_partition, fit_regression_tree)
from .rng import RngStream

__version__ = "0.1.0"

__all__ = [
    "BridgeConfig", "BridgeNotConverged", "CameConfig", "EstimatorResult", "bridge_sampling", "came",
    "harmonic_mean", "warp_bridge_sampling", "DecomposableGraph", "NotDecomposableError",
    "ApproximationDiagnostics", "HybridConfig", "HybridEstimate", "RepresentativeRule", "cell_log_mass",
    "hybrid_log_ml", "interpolation_bound_report", "representative_log_value", "Cell", "DyadicPartition",
    "LabeledSample", "RegressionTree", "TreeConfig", "bounding_box", "extract_partition",
    "fit_regression_tree", "RngStream",
]
