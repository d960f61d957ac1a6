"""Collective quantum steering: inequalities, frame search and protocol simulation."""

__version__ = "0.1.0"

from .core import (
    DensityMatrix,
    FrameAngle,
    MeasurementTriad,
    StateValidationError,
    StateVector,
    generalized_ghz,
    generalized_w,
    load_state,
    named_state,
    partial_trace,
    rotated_pauli_triad,
    save_state,
    tensor_product,
)
from .kernels import BACKEND
from .protocol import (
    KeyRateReport,
    PartyBehavior,
    QkaResult,
    QpcResult,
    conditional_entropy,
    key_rate_bound,
    run_qka,
    run_qpc,
)
from .search import (
    ClassificationResult,
    MaximizeResult,
    ScanCurve,
    SearchConfig,
    alpha_scan,
    appendix_b_check,
    classify_collective,
    maximize_violation,
)
from .steering import (
    CATALOG,
    IDS,
    ConditionalEnsemble,
    InequalitySpec,
    LHSEnsemble,
    ViolationReport,
    concurrence,
    conditional_ensemble_pair,
    conditional_ensemble_single,
    evaluate_inequality,
    evaluate_lhs_model,
    l1_coherence,
    lhs_soundness_check,
    random_lhs_ensemble,
)
