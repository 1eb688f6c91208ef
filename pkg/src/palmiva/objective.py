"""Cost functions of the Gaussian IVA likelihood and its regularized split form.

All costs are extended-real valued: points outside the domain (singular
demixing slices, non positive-definite precision slices) evaluate to
``+inf`` rather than raising.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateInputError
from .tensor_model import EmpiricalCovariance, scv_grams

__all__ = [
    "RegularizationParams",
    "cost_h",
    "cost_f",
    "cost_g",
    "cost_total",
    "cost_unregularized",
    "cost_tilde",
    "closed_form_C",
]


@dataclass(frozen=True)
class RegularizationParams:
    """Weight ``alpha`` of the unit-diagonal penalty and eigenvalue floor ``epsilon``."""

    alpha: float = 1.0
    epsilon: float = 1e-12

    def __post_init__(self):
        if not self.alpha > 0:
            raise ConfigError(f"alpha must be positive, got {self.alpha}")
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")


def _logdet_pd(M: np.ndarray) -> np.ndarray | None:
    """Log-determinants of a stack of symmetric matrices, or None if any is not PD."""
    try:
        L = np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        return None
    d = np.diagonal(L, axis1=-2, axis2=-1)
    if not np.all(np.isfinite(d)) or np.any(d <= 0):
        return None
    return 2.0 * np.log(d).sum(axis=-1)


def cost_h(W, C, R: EmpiricalCovariance, reg: RegularizationParams, grams=None) -> float:
    """Smooth coupling term: ``0.5 * sum_n tr(C_n W_n R W_n^T) + alpha/2 * ||diag(C_n) - 1||^2``."""
    if grams is None:
        grams = scv_grams(W, R)
    trace = np.einsum("nkl,nlk->", C, grams)
    diag = np.diagonal(C, axis1=1, axis2=2)
    penalty = np.sum((diag - 1.0) ** 2)
    return float(0.5 * (trace + reg.alpha * penalty))


def cost_f(W) -> float:
    """``-sum_k log|det W[k]|``, or ``+inf`` when a slice is singular."""
    W = np.asarray(W, dtype=float)
    if not np.all(np.isfinite(W)):
        return np.inf
    sign, logdet = np.linalg.slogdet(W)
    if np.any(sign == 0) or not np.all(np.isfinite(logdet)):
        return np.inf
    return float(-logdet.sum())


def cost_g(C, reg: RegularizationParams) -> float:
    """``-0.5 * sum_n log det C_n`` on the set where every eigenvalue is at least epsilon."""
    C = np.asarray(C, dtype=float)
    if not np.all(np.isfinite(C)):
        return np.inf
    Cs = 0.5 * (C + C.transpose(0, 2, 1))
    lam = np.linalg.eigvalsh(Cs)
    slack = 1e-12 * np.maximum(np.abs(lam).max(axis=1), 1.0)
    if np.any(lam[:, 0] < reg.epsilon - slack):
        return np.inf
    # clamp roundoff-level excursions below the floor
    lam = np.maximum(lam, reg.epsilon)
    return float(-0.5 * np.log(lam).sum())


def cost_total(W, C, R: EmpiricalCovariance, reg: RegularizationParams) -> float:
    """Regularized objective ``h + f + g``."""
    f = cost_f(W)
    if f == np.inf:
        return np.inf
    g = cost_g(C, reg)
    if g == np.inf:
        return np.inf
    return cost_h(W, C, R, reg) + f + g


def cost_unregularized(W, C, R: EmpiricalCovariance) -> float:
    """Negative log-likelihood (up to constants) of the Gaussian IVA model."""
    f = cost_f(W)
    if f == np.inf:
        return np.inf
    C = np.asarray(C, dtype=float)
    if not np.allclose(C, C.transpose(0, 2, 1), rtol=0, atol=1e-12 * max(1.0, np.abs(C).max())):
        return np.inf
    logdet_C = _logdet_pd(C)
    if logdet_C is None:
        return np.inf
    grams = scv_grams(W, R)
    trace = np.einsum("nkl,nlk->", C, grams)
    return float(0.5 * trace - 0.5 * logdet_C.sum() + f)


def cost_tilde(W, R: EmpiricalCovariance) -> float:
    """Demixing-only cost ``0.5 * sum_n log det(W_n R W_n^T) - sum_k log|det W[k]|``."""
    f = cost_f(W)
    if f == np.inf:
        return np.inf
    logdet_G = _logdet_pd(scv_grams(W, R))
    if logdet_G is None:
        return np.inf
    return float(0.5 * logdet_G.sum() + f)


def closed_form_C(W, R: EmpiricalCovariance) -> np.ndarray:
    """Minimizer over C of the unregularized cost: the inverses of the SCV Gram matrices."""
    grams = scv_grams(W, R)
    lam = np.linalg.eigvalsh(grams)
    for n in range(grams.shape[0]):
        if not lam[n, 0] > 1e-14 * max(lam[n, -1], 0.0):
            raise DegenerateInputError(f"Gram matrix of SCV {n} is singular")
    C = np.linalg.inv(grams)
    return 0.5 * (C + C.transpose(0, 2, 1))
