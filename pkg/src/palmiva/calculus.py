"""Partial gradients, Lipschitz moduli, proximity operators and stopping metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .objective import RegularizationParams
from .tensor_model import EmpiricalCovariance, project_rows, scv_grams

__all__ = [
    "LipschitzInfo",
    "grad_W",
    "grad_C",
    "spectral_radius_C",
    "lipschitz_W",
    "lipschitz_info",
    "prox_f",
    "prox_g",
    "theta_W",
    "theta_C",
]


@dataclass(frozen=True)
class LipschitzInfo:
    varrho_R: float
    rho_C: float
    L_W: float
    L_C: float


def grad_W(W, C, R: EmpiricalCovariance, T=None) -> np.ndarray:
    """Partial gradient of ``h`` in ``W``.

    Row ``n`` of slice ``k`` is ``sum_l C[n, k, l] * block(k, l) @ W[l, n]``.
    ``T`` may be passed in when :func:`~palmiva.tensor_model.project_rows`
    has already been evaluated at ``W``.
    """
    if T is None:
        T = project_rows(W, R)
    return np.einsum("nkl,lnkm->knm", C, T)


def grad_C(W, C, R: EmpiricalCovariance, reg: RegularizationParams, grams=None) -> np.ndarray:
    """Partial gradient of ``h`` in ``C``: ``0.5 * W_n R W_n^T + alpha * (Diag(C_n) - I)``."""
    if grams is None:
        grams = scv_grams(W, R)
    K = C.shape[1]
    diag = np.diagonal(C, axis1=1, axis2=2)
    out = 0.5 * grams
    idx = np.arange(K)
    out[:, idx, idx] += reg.alpha * (diag - 1.0)
    return out


def spectral_radius_C(C) -> float:
    """``max_n ||C_n||_2``."""
    return float(np.linalg.norm(C, ord=2, axis=(1, 2)).max())


def lipschitz_W(C, R: EmpiricalCovariance) -> float:
    """Lipschitz modulus of ``grad_W`` for fixed ``C``."""
    return spectral_radius_C(C) * R.varrho


def lipschitz_info(C, R: EmpiricalCovariance, reg: RegularizationParams) -> LipschitzInfo:
    rho = spectral_radius_C(C)
    return LipschitzInfo(varrho_R=R.varrho, rho_C=rho, L_W=rho * R.varrho, L_C=reg.alpha)


def prox_f(Wp, c: float) -> np.ndarray:
    """Proximity operator of ``c * f`` with ``f = -sum_k log|det W[k]|``.

    Each slice keeps its singular vectors; singular values ``s`` map to
    ``(s + sqrt(s**2 + 4c)) / 2``, so outputs are always nonsingular.
    """
    if not c > 0:
        raise ValueError(f"step must be positive, got {c}")
    U, s, Vt = np.linalg.svd(Wp)
    s_new = 0.5 * (s + np.sqrt(s * s + 4.0 * c))
    return np.matmul(U * s_new[:, None, :], Vt)


def prox_g(Cp, c: float, reg: RegularizationParams) -> np.ndarray:
    """Proximity operator of ``c * g`` with ``g = -1/2 sum_n log det C_n`` on ``C_n >= epsilon I``.

    Works on the eigendecomposition of the symmetrized input, which stays
    correct for indefinite inputs.
    """
    if not c > 0:
        raise ValueError(f"step must be positive, got {c}")
    Cs = 0.5 * (Cp + Cp.transpose(0, 2, 1))
    lam, Q = np.linalg.eigh(Cs)
    lam_new = np.maximum(reg.epsilon, 0.5 * (lam + np.sqrt(lam * lam + 2.0 * c)))
    out = np.matmul(Q * lam_new[:, None, :], Q.transpose(0, 2, 1))
    return 0.5 * (out + out.transpose(0, 2, 1))


def theta_W(W, Wprev) -> float:
    """``max_{k,n} ||W[k, n] - Wprev[k, n]||^2 / (2N)``."""
    N = W.shape[1]
    d = W - Wprev
    return float(np.einsum("knm,knm->kn", d, d).max() / (2 * N))


def theta_C(C, Cprev) -> float:
    """``max_{n,k} ||C[n, k] - Cprev[n, k]||^2 / (2K)``."""
    K = C.shape[1]
    d = C - Cprev
    return float(np.einsum("nkl,nkl->nk", d, d).max() / (2 * K))
