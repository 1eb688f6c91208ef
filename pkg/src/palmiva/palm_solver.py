"""PALM-IVA-G: alternating proximal-gradient minimization of the regularized cost."""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .calculus import grad_C, grad_W, lipschitz_W, prox_f, prox_g, spectral_radius_C, theta_C, theta_W
from .errors import ConfigError, NumericalFailure, RankDeficiencyError
from .objective import RegularizationParams, cost_f, cost_g, cost_h
from .rng import stream
from .tensor_model import Dims, EmpiricalCovariance, project_rows, scv_grams

__all__ = [
    "PalmConfig",
    "SolveTrace",
    "init_point",
    "palm_solve",
    "stationarity_residual",
    "rho_bar",
    "w_norm_bound",
]

INIT_MODES = ("identity", "random_orthogonal")


@dataclass(frozen=True)
class PalmConfig:
    gamma_W: float = 0.99
    gamma_C: float = 1.99
    alpha: float = 1.0
    epsilon: float = 1e-12
    delta: float = 1e-10
    max_outer: int = 20000
    max_inner_W: int = 15
    max_inner_C: int = 1
    seed: int = 0
    init_mode: str = "identity"

    def __post_init__(self):
        if not 0 < self.gamma_W < 1:
            raise ConfigError(f"gamma_W must lie in (0, 1), got {self.gamma_W}")
        if not 0 < self.gamma_C < 2:
            raise ConfigError(f"gamma_C must lie in (0, 2), got {self.gamma_C}")
        if not self.alpha > 0:
            raise ConfigError(f"alpha must be positive, got {self.alpha}")
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        if not self.epsilon < math.sqrt(self.gamma_C / (2 * self.alpha)):
            raise ConfigError("epsilon must be below sqrt(gamma_C / (2 alpha))")
        if not self.delta > 0:
            raise ConfigError(f"delta must be positive, got {self.delta}")
        for name in ("max_outer", "max_inner_W", "max_inner_C"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1")
        if self.init_mode not in INIT_MODES:
            raise ConfigError(f"init_mode must be one of {INIT_MODES}, got {self.init_mode!r}")

    @property
    def reg(self) -> RegularizationParams:
        return RegularizationParams(self.alpha, self.epsilon)


@dataclass
class SolveTrace:
    """Per-outer-iteration diagnostics.

    ``cost[0]`` is the cost at the initial point; entry ``i`` of every other
    list belongs to outer iteration ``i`` (1-based, so the lists are one
    shorter than ``cost``).
    """

    cost: list = field(default_factory=list)
    theta_W: list = field(default_factory=list)
    theta_C: list = field(default_factory=list)
    L_W: list = field(default_factory=list)
    rho_C: list = field(default_factory=list)
    inner_W: list = field(default_factory=list)
    inner_C: list = field(default_factory=list)
    iterations: int = 0
    wall_time: float = 0.0
    converged: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def init_point(dims: Dims, cfg: PalmConfig, R: EmpiricalCovariance | None = None):
    """Feasible starting point: identity or seeded random orthogonal ``W``, identity ``C``."""
    K, N = dims.K, dims.N
    if cfg.init_mode == "identity":
        W = np.broadcast_to(np.eye(N), (K, N, N)).copy()
    else:
        rng = stream(cfg.seed, "init-orthogonal")
        W = np.empty((K, N, N))
        for k in range(K):
            Q, Rf = np.linalg.qr(rng.standard_normal((N, N)))
            W[k] = Q * np.sign(np.diag(Rf))
    C = np.broadcast_to(np.eye(K), (N, K, K)).copy()
    return W, C


def rho_bar(C0, K: int, cfg: PalmConfig) -> float:
    """Upper bound on ``max_n ||C_n||_2`` along the iterates."""
    return max(spectral_radius_C(C0), K * (1 + math.sqrt(1 / (2 * cfg.alpha * cfg.gamma_C))))


def w_norm_bound(initial_cost: float, sigma_min: float, KN: int, rbar: float, epsilon: float) -> float:
    """Squared-Frobenius bound on the W iterates from the boundedness argument.

    Obtained from ``(es/4)||W||^2 - (KN/2)(log(2/es) - 1) <= J + (KN/2) log rbar``
    with ``es = epsilon * sigma_min`` and ``J`` non-increasing.
    """
    es = epsilon * sigma_min
    return 4.0 / es * (initial_cost + 0.5 * KN * (math.log(rbar) + math.log(2.0 / es) - 1.0))


def palm_solve(R: EmpiricalCovariance, cfg: PalmConfig | None = None, W0=None, C0=None):
    """Run PALM-IVA-G on an empirical covariance.

    Parameters
    ----------
    R : EmpiricalCovariance
        Covariance of the (centered, usually whitened) stacked data.
    cfg : PalmConfig, optional
        Hyperparameters; defaults are the published settings.
    W0, C0 : ndarray, optional
        Starting point overriding ``cfg.init_mode``.

    Returns
    -------
    W : ndarray, shape (K, N, N)
    C : ndarray, shape (N, K, K)
    trace : SolveTrace
    """
    cfg = cfg or PalmConfig()
    reg = cfg.reg
    K, N = R.K, R.N
    if not R.sigma_min > 0:
        raise RankDeficiencyError("empirical covariance is singular")
    W, C = init_point(Dims(K, N, K * N + 1), cfg, R)
    if W0 is not None:
        W = np.array(W0, dtype=float)
    if C0 is not None:
        C = np.array(C0, dtype=float)

    trace = SolveTrace()
    start = time.perf_counter()
    grams = scv_grams(W, R)
    cost = cost_h(W, C, R, reg, grams) + cost_f(W) + cost_g(C, reg)
    if not np.isfinite(cost):
        raise NumericalFailure("initial point is infeasible", trace)
    trace.cost.append(cost)

    c_C = cfg.gamma_C / cfg.alpha
    delta = cfg.delta
    for i in range(cfg.max_outer):
        W_prev, C_prev = W, C

        L = lipschitz_W(C, R)
        c_W = cfg.gamma_W / L
        for j in range(cfg.max_inner_W):
            W_new = prox_f(W - c_W * grad_W(W, C, R), c_W)
            th = theta_W(W_new, W)
            W = W_new
            if th <= delta:
                break
        n_W = j + 1

        grams = scv_grams(W, R)
        for j in range(cfg.max_inner_C):
            C_new = prox_g(C - c_C * grad_C(W, C, R, reg, grams), c_C, reg)
            th = theta_C(C_new, C)
            C = C_new
            if th <= delta:
                break
        n_C = j + 1

        tW = theta_W(W, W_prev)
        tC = theta_C(C, C_prev)
        cost = cost_h(W, C, R, reg, grams) + cost_f(W) + cost_g(C, reg)
        trace.cost.append(cost)
        trace.theta_W.append(tW)
        trace.theta_C.append(tC)
        trace.L_W.append(L)
        trace.rho_C.append(spectral_radius_C(C))
        trace.inner_W.append(n_W)
        trace.inner_C.append(n_C)
        trace.iterations = i + 1
        if not np.isfinite(cost):
            trace.wall_time = time.perf_counter() - start
            raise NumericalFailure(f"non-finite cost at outer iteration {i + 1}", trace)
        if max(tW, tC) <= delta:
            trace.converged = True
            break

    trace.wall_time = time.perf_counter() - start
    return W, C, trace


def stationarity_residual(W, C, R: EmpiricalCovariance, cfg: PalmConfig | None = None) -> float:
    """Fixed-point residual of both proximal-gradient maps at ``(W, C)``.

    Zero exactly at critical points of the regularized cost.
    """
    cfg = cfg or PalmConfig()
    reg = cfg.reg
    c_W = cfg.gamma_W / lipschitz_W(C, R)
    c_C = cfg.gamma_C / cfg.alpha
    T = project_rows(W, R)
    rW = W - prox_f(W - c_W * grad_W(W, C, R, T), c_W)
    rC = C - prox_g(C - c_C * grad_C(W, C, R, reg, scv_grams(W, R, T)), c_C, reg)
    return float(max(np.linalg.norm(rW), np.linalg.norm(rC)))
