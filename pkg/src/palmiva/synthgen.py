"""Synthetic benchmark generator: SCV covariances, mixing tensors and data.

Sources are drawn SCV by SCV: for source ``n`` the K-vector collecting that
source across datasets is Gaussian with covariance ``Sigma[n]``; distinct
SCVs are independent. Every draw comes from a stream keyed on
``(seed, purpose, index)`` so results do not depend on generation order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateInputError
from .rng import stream
from .tensor_model import DatasetStack, Dims

__all__ = [
    "CASES",
    "CovModelParams",
    "GroundTruth",
    "make_case",
    "make_covariances",
    "make_mixing",
    "sample_sources",
    "mix",
    "generate_trial",
]

# (variability lambda, correlation interval) per benchmark case
CASES = {
    "A": (0.04, (0.2, 0.3)),
    "B": (0.25, (0.2, 0.3)),
    "C": (0.04, (0.6, 0.7)),
    "D": (0.25, (0.6, 0.7)),
}

MAX_MIXING_COND = 1e8


@dataclass(frozen=True)
class CovModelParams:
    rho: np.ndarray
    lam: float
    rank: int
    seed: int = 0

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=float)
        object.__setattr__(self, "rho", rho)
        if np.any(rho < 0) or np.any(rho > 1):
            raise ConfigError("rho entries must lie in [0, 1]")
        if not 0 <= self.lam <= 1:
            raise ConfigError(f"lambda must lie in [0, 1], got {self.lam}")
        if self.rank < 1:
            raise ConfigError(f"rank must be at least 1, got {self.rank}")
        eta = self.eta
        if np.any(eta < 0):
            n = int(np.argmin(eta))
            raise ConfigError(f"eta = 1 - rho - lambda is negative for SCV {n}")

    @property
    def eta(self) -> np.ndarray:
        return 1.0 - self.rho - self.lam


@dataclass(frozen=True)
class GroundTruth:
    A: np.ndarray  # (K, N, N)
    Sigma: np.ndarray  # (N, K, K)
    case_label: str = "custom"


def make_case(case: str, dims: Dims, seed: int = 0) -> CovModelParams:
    """Covariance-model parameters for one of the benchmark cases A-D."""
    try:
        lam, (lo, hi) = CASES[case]
    except KeyError:
        raise ConfigError(f"unknown case {case!r}; expected one of {sorted(CASES)}") from None
    N = dims.N
    rho = np.linspace(lo, hi, N) if N > 1 else np.array([lo])
    return CovModelParams(rho=rho, lam=lam, rank=dims.K + 10, seed=seed)


def make_covariances(params: CovModelParams, K: int) -> np.ndarray:
    """``Sigma[n] = rho_n 11^T + (lambda/R) Q_n Q_n^T + eta_n I`` with a fresh Gaussian ``Q_n`` per SCV."""
    N = params.rho.shape[0]
    ones = np.ones((K, K))
    eye = np.eye(K)
    Sigma = np.empty((N, K, K))
    for n in range(N):
        Q = stream(params.seed, "cov-Q", n).standard_normal((K, params.rank))
        S = params.rho[n] * ones + (params.lam / params.rank) * (Q @ Q.T) + params.eta[n] * eye
        Sigma[n] = 0.5 * (S + S.T)
    return Sigma


def make_mixing(dims: Dims, seed: int = 0) -> np.ndarray:
    """K standard-Gaussian ``N x N`` mixing matrices, redrawn if badly conditioned."""
    K, N = dims.K, dims.N
    A = np.empty((K, N, N))
    for k in range(K):
        rng = stream(seed, "mixing", k)
        while True:
            M = rng.standard_normal((N, N))
            if np.linalg.cond(M) <= MAX_MIXING_COND:
                break
        A[k] = M
    return A


def sample_sources(Sigma: np.ndarray, dims: Dims, seed: int = 0) -> np.ndarray:
    """Draw ``V`` i.i.d. samples of every SCV; returns sources of shape ``(K, N, V)``."""
    K, N, V = dims
    S = np.empty((K, N, V))
    for n in range(N):
        try:
            L = np.linalg.cholesky(Sigma[n])
        except np.linalg.LinAlgError:
            raise DegenerateInputError(f"Sigma[{n}] is not positive definite") from None
        Z = stream(seed, "sources", n).standard_normal((K, V))
        S[:, n, :] = L @ Z
    return S


def mix(A: np.ndarray, S: np.ndarray) -> DatasetStack:
    """Apply ``X[k] = A[k] @ S[k]`` for every dataset."""
    return DatasetStack(np.matmul(A, S))


def generate_trial(case: str, dims: Dims, seed: int) -> tuple[GroundTruth, DatasetStack]:
    """Full pipeline for one benchmark trial: parameters, ground truth and mixed data."""
    params = make_case(case, dims, seed)
    Sigma = make_covariances(params, dims.K)
    A = make_mixing(dims, seed)
    S = sample_sources(Sigma, dims, seed)
    return GroundTruth(A=A, Sigma=Sigma, case_label=case), mix(A, S)
