"""topogap: estimate test performance from the topology of a network's
functional correlation graph, and stop training when that topology says so.

The pipeline: activations -> Pearson correlations -> distances d = 1 - |nu|
-> Vietoris-Rips filtration -> persistence diagrams (H0, H1) -> life/midlife
summaries -> linear gap model -> test-performance estimate.
"""

__version__ = "0.1.0"

from .earlystop import CONTINUE, STOP, PeakScale, PeakTrace, peak_scale, update_and_check
from .errors import (
    DegenerateDataError,
    InputError,
    MalformedFileError,
    NoCavitiesError,
    NodeCapError,
    NonFiniteValueError,
    NumericError,
    ProtocolError,
    SingularFitError,
    ToolError,
    TooFewSamplesError,
)
from .filtration import FilteredComplex, filtration_grid, vietoris_rips
from .gap import (
    GapModel,
    GapRecord,
    estimate_test_performance,
    estimation_error,
    fit_gap_model,
    leave_one_group_out,
    leave_one_sample_out,
    predict_gap,
)
from .homology import (
    BettiCurve,
    PersistenceDiagram,
    betti_curve,
    brute_force_betti,
    persistent_homology,
)
from .metric import (
    ActivationMatrix,
    CorrelationMatrix,
    DistanceMatrix,
    correlation_matrix,
    load_activations,
    to_distance,
)
from .summaries import TopologicalSummary, life, midlife, summarize_diagram

__all__ = [
    "__version__",
    "ActivationMatrix",
    "BettiCurve",
    "CONTINUE",
    "CorrelationMatrix",
    "DegenerateDataError",
    "DistanceMatrix",
    "FilteredComplex",
    "GapModel",
    "GapRecord",
    "InputError",
    "MalformedFileError",
    "NoCavitiesError",
    "NodeCapError",
    "NonFiniteValueError",
    "NumericError",
    "PeakScale",
    "PeakTrace",
    "PersistenceDiagram",
    "ProtocolError",
    "STOP",
    "SingularFitError",
    "ToolError",
    "TooFewSamplesError",
    "TopologicalSummary",
    "betti_curve",
    "brute_force_betti",
    "correlation_matrix",
    "estimate_test_performance",
    "estimation_error",
    "filtration_grid",
    "fit_gap_model",
    "leave_one_group_out",
    "leave_one_sample_out",
    "life",
    "load_activations",
    "midlife",
    "peak_scale",
    "persistent_homology",
    "predict_gap",
    "summarize_diagram",
    "to_distance",
    "update_and_check",
    "vietoris_rips",
]
