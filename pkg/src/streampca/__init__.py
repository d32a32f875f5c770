"""Streaming single-eigenvector estimators (Krasulina, Oja, CCIPCA) and a convergence-rate harness."""

from .errors import StreamPCAError
from .estimators import (
    EstimatorState,
    ScheduleParams,
    Scheme,
    UpdateDiagnostics,
    ccipca_step,
    eigenvalue_estimate_single,
    gamma_at,
    init_state,
    krasulina_step_max,
    krasulina_step_min,
    krasulina_xi,
    oja_step,
    step,
    validate_schedule,
)
from .harness import CurvePoint, ExperimentConfig, aggregate, run_experiment, run_single
from .linalg import Spectrum, operator_norm, rayleigh_quotient, sym_eigen, trace
from .metrics import (
    RateFit,
    alignment_loss,
    eigenvalue_error,
    f_value,
    fit_rate_slope,
    fourth_moment_gaussian,
    theoretical_bound,
)
from .streams import (
    PRESETS,
    CovarianceModel,
    SampleStream,
    build_fixed_dataset,
    make_covariance,
    random_orthogonal,
    sample_gaussian,
    stream_from_csv,
)

__version__ = "0.1.0"
