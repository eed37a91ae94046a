"""Spectral-forgetting excitation collection and composite-learning control.

The package simulates uncertain nonlinear systems whose excitation history is
accumulated into a bounded linear regression pair (Z, W) by per-eigendirection
forgetting, and whose parameter estimates are corrected with that pair: a
certainty-equivalence loop for first-order plants and a tuning-function
backstepping loop for strict-feedback chains.
"""

from .spectral import (
    NotSymmetricError,
    PSDViolationError,
    Spectrum,
    numeric_rank,
    project,
    smallest_positive_eigenvalue,
    symmetric_eigensystem,
)
from .collector import (
    CollectorState,
    ForgettingConfig,
    collector_rhs,
    forgetting_factor,
    saturation,
    varpi,
    z_substitution_step,
)
from .plants import (
    FirstOrderPlant,
    ReferenceSignal,
    StrictFeedbackPlant,
    bs_benchmark,
    first_order_dynamics,
    fo_benchmark,
    sine_reference,
    stacked_regressor,
    strict_feedback_dynamics,
)
from .estimators import (
    EstimatorState,
    FilterBankState,
    ce_control,
    composite_update,
    filter_bank_rhs,
    filtered_composite_update,
    lyapunov_update,
)
from .backstepping import (
    BacksteppingEvaluation,
    BacksteppingGains,
    backstepping_update,
    evaluate_backstepping,
)
from .simulate import (
    DivergenceError,
    ExcitationReport,
    ScenarioConfig,
    TrajectoryLog,
    decompose_error,
    excitation_diagnostic,
    lyapunov_value,
    rk4_step,
    run_scenario,
)
from .config import (
    ConfigError,
    SCENARIO_NAMES,
    builtin_scenario_text,
    parse_config,
    scenario_config,
)
from .reporting import emit_csv, plot_log, read_csv

__version__ = "0.1.0"
