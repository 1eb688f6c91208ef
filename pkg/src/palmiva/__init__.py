"""Gaussian independent vector analysis solved by proximal alternating
linearized minimization, with a gradient-descent baseline, the jISI score
and a synthetic benchmark harness."""

from .tensor_model import (
    DatasetStack,
    Dims,
    EmpiricalCovariance,
    WhiteningInfo,
    center,
    empirical_covariance,
    scv_gram,
    scv_grams,
    stack,
    whiten,
)
from .objective import (
    RegularizationParams,
    closed_form_C,
    cost_f,
    cost_g,
    cost_h,
    cost_tilde,
    cost_total,
    cost_unregularized,
)
from .calculus import (
    LipschitzInfo,
    grad_C,
    grad_W,
    lipschitz_info,
    lipschitz_W,
    prox_f,
    prox_g,
    theta_C,
    theta_W,
)
from .palm_solver import PalmConfig, SolveTrace, init_point, palm_solve, stationarity_residual
from .baseline_ivagv import IvagvConfig, grad_tilde, ivagv_solve, normalize_rows
from .synthgen import CovModelParams, GroundTruth, make_case, make_covariances, make_mixing, mix, sample_sources
from .evaluation import TrialResult, jisi, score_in_original_space, summarize
from .errors import (
    ConfigError,
    DegenerateInputError,
    DimensionError,
    NumericalFailure,
    PalmIvaError,
    RankDeficiencyError,
)

__version__ = "0.1.0"
