"""efnlab: a laboratory for the align-and-average model-bias phenomenon.

Averaging pure-noise observations that were each cyclically aligned to a
template by maximum correlation produces an estimate that resembles the
template.  This package simulates that pipeline, computes the analytic
predictions for how fast the estimator's Fourier phases and magnitudes
converge, and cross-validates simulation against theory.
"""

from .alignment import (
    AlignmentResult,
    correlation_oracle,
    correlation_sequence,
    estimate_shift,
    fourier_correlation_sequence,
)
from .errors import (
    ExcludedBinError,
    InsufficientDataError,
    InvalidArgumentError,
    LengthMismatchError,
    RejectedTemplateError,
    UndefinedCorrelationError,
)
from .estimator import (
    EfnAccumulator,
    EfnEstimate,
    PhaseMse,
    accumulate,
    pearson_correlation,
    phase_error,
    phase_mse,
)
from .experiment import (
    AggregateStats,
    ExperimentConfig,
    SlopeFit,
    SweepSpec,
    TrialResult,
    aggregate_trials,
    fit_loglog_slope,
    gumbel_standard_ppf,
    ks_statistic,
    observation_rng,
    run_experiment,
    run_sweep,
    run_trial,
    sweep_configs,
)
from .signals import (
    Assumption1Diagnostic,
    NoiseSample,
    SignalFamilySpec,
    SpectralRepr,
    TemplateSignal,
    autocorrelation,
    check_assumption1,
    circular_shift,
    dft,
    draw_noise,
    generate_template,
    idft,
    signal_from_csv,
    signal_from_json,
    signal_to_csv,
    signal_to_json,
    wrap_phase,
)
from .theory import (
    AlignmentMoments,
    CkEstimate,
    ConditionalGaussian,
    GumbelConstants,
    Lemma1Report,
    alignment_moments,
    build_conditional_gaussian,
    estimate_ck,
    estimate_ck_profile,
    gumbel_constants,
    lemma1_check,
    m_star,
    predict_magnitude,
    predict_phase_mse,
    prediction_rows,
    sample_cyclostationary,
    softmax_expectation,
)

__version__ = "0.1.0"
