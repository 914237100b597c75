"""corriter: iterated row-correlation dynamics at desk scale.

Apply the Pearson correlation operator to a square matrix over and over,
record how fast the iterates settle onto +-1 sign patterns, and check the
resulting statistics against reference values with reproducible,
seed-deterministic experiments.
"""

__version__ = "0.1.0"

from .core import (  # noqa: F401
    DEFAULT_TOLERANCES,
    InvarianceReport,
    MatrixState,
    SignPattern,
    SphericalConfig,
    Tolerances,
    center_rows,
    check_invariances,
    correlation_step,
    detect_sign_pattern,
    gram,
    is_nondegenerate,
    matrix_state,
    min_eigenvalue,
    psd_quadratic_forms,
    sphericalize,
)
from .diagnostics import (  # noqa: F401
    StepRecord,
    Termination,
    TrajectoryTrace,
    audit_trace,
    contraction_ratio,
    convergence_time,
    entrywise_step,
    frobenius_step,
    kahan_sum,
    total_variation,
)
from .harness import (  # noqa: F401
    DEFAULT_MASTER_SEED,
    TABLE_DIMS,
    ExperimentConfig,
    TrialOutcome,
    draw_nondegenerate,
    init_matrix,
    run_experiment,
    run_trajectory,
)
from .laws import (  # noqa: F401
    DEFAULT_THRESHOLDS,
    BinnedCurve,
    EcdfCurve,
    LawReport,
    LawThresholds,
    QuantileSummary,
    binned_contraction_curve,
    collect_pairs,
    ecdf,
    summarize,
    verify_law1,
    verify_law2,
    verify_law3,
    verify_law4,
)
