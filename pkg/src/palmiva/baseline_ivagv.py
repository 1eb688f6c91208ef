"""IVA-G-V baseline: gradient descent on the demixing-only cost.

Each iteration takes an Armijo-backtracked gradient step on ``cost_tilde``
and then rescales every demixing row to unit estimated source variance.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .calculus import grad_W, theta_W
from .errors import ConfigError, DegenerateInputError, NumericalFailure, RankDeficiencyError
from .objective import closed_form_C, cost_tilde
from .palm_solver import INIT_MODES, SolveTrace
from .rng import stream
from .tensor_model import EmpiricalCovariance, scv_grams

__all__ = ["IvagvConfig", "grad_tilde", "normalize_rows", "ivagv_solve"]

MAX_HALVINGS = 60


@dataclass(frozen=True)
class IvagvConfig:
    # plain Euclidean steps stall on flat regions of cost_tilde; 1e-6 stops far from the optimum
    delta: float = 1e-10
    max_iter: int = 20000
    armijo_c1: float = 1e-4
    backtrack_factor: float = 0.5
    initial_step: float = 1.0
    seed: int = 0
    init_mode: str = "identity"

    def __post_init__(self):
        if not 0 < self.backtrack_factor < 1:
            raise ConfigError("backtrack_factor must lie in (0, 1)")
        if not 0 < self.armijo_c1 < 1:
            raise ConfigError("armijo_c1 must lie in (0, 1)")
        if not self.delta > 0:
            raise ConfigError("delta must be positive")
        if not self.initial_step > 0:
            raise ConfigError("initial_step must be positive")
        if self.max_iter < 1:
            raise ConfigError("max_iter must be at least 1")
        if self.init_mode not in INIT_MODES:
            raise ConfigError(f"init_mode must be one of {INIT_MODES}, got {self.init_mode!r}")


def grad_tilde(W, R: EmpiricalCovariance) -> np.ndarray:
    """Gradient of ``cost_tilde`` at a point with nonsingular slices and PD Grams."""
    sign, _ = np.linalg.slogdet(W)
    if np.any(sign == 0):
        raise DegenerateInputError("singular demixing slice")
    C = closed_form_C(W, R)
    return grad_W(W, C, R) - np.linalg.inv(W).transpose(0, 2, 1)


def normalize_rows(W, R: EmpiricalCovariance) -> np.ndarray:
    """Scale each row so that its estimated source has unit variance."""
    grams = scv_grams(W, R)
    var = np.diagonal(grams, axis1=1, axis2=2).T  # (K, N)
    if np.any(var <= 0):
        k, n = np.argwhere(var <= 0)[0]
        raise DegenerateInputError(f"row {n} of slice {k} has zero variance")
    return W / np.sqrt(var)[:, :, None]


def _init(K, N, cfg):
    if cfg.init_mode == "identity":
        return np.broadcast_to(np.eye(N), (K, N, N)).copy()
    rng = stream(cfg.seed, "init-orthogonal")
    W = np.empty((K, N, N))
    for k in range(K):
        Q, Rf = np.linalg.qr(rng.standard_normal((N, N)))
        W[k] = Q * np.sign(np.diag(Rf))
    return W


def ivagv_solve(R: EmpiricalCovariance, cfg: IvagvConfig | None = None, W0=None):
    """Minimize ``cost_tilde`` by backtracked gradient descent with row normalization.

    Returns
    -------
    W : ndarray, shape (K, N, N)
    trace : SolveTrace
        ``cost`` holds ``cost_tilde`` per iterate, ``inner_W`` the number of
        step-size trials used at each iteration.
    """
    cfg = cfg or IvagvConfig()
    if not R.sigma_min > 0:
        raise RankDeficiencyError("empirical covariance is singular")
    W = _init(R.K, R.N, cfg) if W0 is None else np.array(W0, dtype=float)
    W = normalize_rows(W, R)

    trace = SolveTrace()
    start = time.perf_counter()
    J = cost_tilde(W, R)
    trace.cost.append(J)
    for i in range(cfg.max_iter):
        g = grad_tilde(W, R)
        gg = float(np.vdot(g, g))
        t = cfg.initial_step
        for trial in range(MAX_HALVINGS + 1):
            W_try = W - t * g
            J_try = cost_tilde(W_try, R)
            if J_try <= J - cfg.armijo_c1 * t * gg:
                break
            t *= cfg.backtrack_factor
        else:
            trace.wall_time = time.perf_counter() - start
            raise NumericalFailure(f"linesearch failed at iteration {i + 1}", trace)
        W_new = normalize_rows(W_try, R)
        th = theta_W(W_new, W)
        W = W_new
        J = cost_tilde(W, R)
        trace.cost.append(J)
        trace.theta_W.append(th)
        trace.inner_W.append(trial + 1)
        trace.iterations = i + 1
        if th <= cfg.delta:
            trace.converged = True
            break
    trace.wall_time = time.perf_counter() - start
    return W, trace
