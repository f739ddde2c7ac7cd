"""csbench: compressive-sensing evaluation toolkit.

Measurement-matrix ensembles, sparse recovery solvers, matrix-quality
certification, reconstruction metrics, phase-transition diagrams, and a
deterministic Monte-Carlo campaign runner with CSV/JSON persistence.
"""

__version__ = "0.1.0"

from .campaign import (
    TRIALS_CSV_HEADER,
    CampaignConfig,
    CampaignResult,
    TrialRecord,
    aggregate_records,
    default_threads,
    parse_config,
    read_trials_csv,
    run_campaign,
    write_outputs,
)
from .certify import (
    CertificationReport,
    RipEstimate,
    RipMethod,
    SparkResult,
    certify_matrix,
    coherence,
    measurement_bound,
    nsp_order,
    rip_constant,
    rip_to_nsp_constant,
    spark,
    welch_bound,
)
from .errors import (
    BudgetExceededError,
    ConfigError,
    CsBenchError,
    DegenerateMatrixError,
    InvalidArgumentError,
    UndefinedMetricError,
)
from .kernels import BACKEND
from .matrices import (
    MatrixKind,
    MeasurementMatrix,
    build_matrix,
    custom_matrix,
    load_matrix_csv,
    load_matrix_json,
    save_matrix_csv,
    save_matrix_json,
)
from .metrics import (
    TRIAL_METRIC_KEYS,
    ErrorSparsity,
    MetricDescriptor,
    MetricReport,
    Process,
    compression_ratio,
    compute_trial_metrics,
    correlation,
    covariance,
    csv_value,
    default_hamming_tol,
    error_sparsity,
    hamming_distance,
    is_success,
    json_value,
    metric_registry,
    mse,
    recovery_error,
    registry_lookup,
    rsnr,
    snr_db,
)
from .model import (
    Amplitude,
    Measurements,
    NoiseKind,
    NoiseModel,
    SparseSignal,
    generate_sparse_signal,
    load_signal_csv,
    load_signal_json,
    measure,
    save_signal_csv,
    save_signal_json,
    sparsity_level,
)
from .phase import (
    PhaseConfig,
    PhaseGrid,
    cell_params,
    default_grid,
    ramp_color,
    render_svg,
    run_phase_diagram,
    transition_boundary,
)
from .recovery import (
    RecoveryResult,
    RecoverySpec,
    Solver,
    StepMode,
    basis_pursuit,
    exhaustive_oracle,
    iht,
    omp,
    recover,
    spec_for,
)
from .rng import derive_seed, generator

__all__ = [name for name in dir() if not name.startswith("_")]
