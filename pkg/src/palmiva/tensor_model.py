"""Core data containers and the linear-algebra plumbing shared by every solver.

Tensor layout conventions used throughout the package:

* a demixing tensor ``W`` is an array of shape ``(K, N, N)``; ``W[k]`` is the
  demixing matrix of dataset ``k`` and ``W[k, n]`` is the row that extracts
  source ``n`` from it;
* a precision tensor ``C`` is an array of shape ``(N, K, K)``; ``C[n]`` is the
  precision matrix of source component vector (SCV) ``n``;
* observed data is an array of shape ``(K, N, V)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DimensionError, RankDeficiencyError

__all__ = [
    "Dims",
    "DatasetStack",
    "EmpiricalCovariance",
    "WhiteningInfo",
    "stack",
    "center",
    "empirical_covariance",
    "whiten",
    "scv_gram",
    "scv_grams",
    "project_rows",
    "is_nonsingular",
    "is_feasible_precision",
]


class Dims(NamedTuple):
    """Problem sizes: ``K`` datasets, ``N`` sources per dataset, ``V`` samples."""

    K: int
    N: int
    V: int

    def validate(self) -> "Dims":
        if self.K < 1 or self.N < 1:
            raise DimensionError(f"K and N must be positive, got K={self.K}, N={self.N}")
        if self.V <= self.K * self.N:
            raise DimensionError(
                f"V={self.V} must exceed K*N={self.K * self.N} for a nonsingular covariance"
            )
        return self


@dataclass(frozen=True)
class DatasetStack:
    """The K observed datasets, stored as one ``(K, N, V)`` array."""

    data: np.ndarray

    @property
    def dims(self) -> Dims:
        K, N, V = self.data.shape
        return Dims(K, N, V)

    @property
    def stacked(self) -> np.ndarray:
        """``KN x V`` vertical concatenation; row ``k*N + n`` is row ``n`` of dataset ``k``."""
        K, N, V = self.data.shape
        return self.data.reshape(K * N, V)

    def __getitem__(self, k: int) -> np.ndarray:
        return self.data[k]


def stack(datasets: Sequence[np.ndarray]) -> DatasetStack:
    """Stack K equally shaped ``N x V`` matrices into a :class:`DatasetStack`."""
    if len(datasets) == 0:
        raise DimensionError("need at least one dataset")
    arrays = [np.asarray(x, dtype=float) for x in datasets]
    shape = arrays[0].shape
    if len(shape) != 2:
        raise DimensionError(f"dataset 0 must be 2-D, got shape {shape}")
    for k, x in enumerate(arrays):
        if x.shape != shape:
            raise DimensionError(f"dataset {k} has shape {x.shape}, expected {shape}")
    return DatasetStack(np.ascontiguousarray(np.stack(arrays)))


def center(stack: DatasetStack) -> DatasetStack:
    """Remove the sample mean of every row of every dataset."""
    data = stack.data - stack.data.mean(axis=2, keepdims=True)
    return DatasetStack(data)


class EmpiricalCovariance:
    """Symmetric ``KN x KN`` sample covariance with cached block views.

    Parameters
    ----------
    matrix : ndarray
        The covariance matrix. It is symmetrized on construction.
    K, N : int
        Block structure: K row/column blocks of size N.
    """

    def __init__(self, matrix: np.ndarray, K: int, N: int):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.shape != (K * N, K * N):
            raise DimensionError(f"covariance shape {matrix.shape} does not match K={K}, N={N}")
        self.matrix = 0.5 * (matrix + matrix.T)
        self.matrix.setflags(write=False)
        self.K = K
        self.N = N

    @property
    def blocks(self) -> np.ndarray:
        """View of shape ``(K, N, K, N)``; ``blocks[k, :, l, :]`` is block ``(k, l)``."""
        return self.matrix.reshape(self.K, self.N, self.K, self.N)

    def block(self, k: int, l: int) -> np.ndarray:
        N = self.N
        return self.matrix[k * N:(k + 1) * N, l * N:(l + 1) * N]

    def block_column(self, k: int) -> np.ndarray:
        """The ``KN x N`` slab of columns belonging to dataset ``k`` (0-based)."""
        N = self.N
        return self.matrix[:, k * N:(k + 1) * N]

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    @property
    def sigma_min(self) -> float:
        return float(self.eigenvalues[0])

    @cached_property
    def varrho(self) -> float:
        """Largest spectral norm over the K block columns."""
        return max(
            float(np.linalg.norm(self.block_column(k), ord=2)) for k in range(self.K)
        )

    def __repr__(self) -> str:
        return f"EmpiricalCovariance(K={self.K}, N={self.N})"


def empirical_covariance(stack: DatasetStack) -> EmpiricalCovariance:
    """``(1/V) X X^T`` of the stacked data. The data is assumed centered."""
    K, N, V = stack.data.shape
    X = stack.stacked
    return EmpiricalCovariance(X @ X.T / V, K, N)


@dataclass(frozen=True)
class WhiteningInfo:
    """Per-dataset whitening matrices ``B[k]`` and their inverses, both ``(K, N, N)``."""

    matrices: np.ndarray
    inverses: np.ndarray


def whiten(stack: DatasetStack, tol: float = 1e-12) -> tuple[DatasetStack, WhiteningInfo]:
    """Whiten each dataset with the inverse symmetric square root of its covariance.

    Raises
    ------
    RankDeficiencyError
        If a per-dataset covariance has an eigenvalue below ``tol``.
    """
    K, N, V = stack.data.shape
    B = np.empty((K, N, N))
    Binv = np.empty((K, N, N))
    for k in range(K):
        cov = stack.data[k] @ stack.data[k].T / V
        cov = 0.5 * (cov + cov.T)
        lam, Q = np.linalg.eigh(cov)
        if lam[0] < tol:
            raise RankDeficiencyError(
                f"dataset {k} covariance is rank deficient (smallest eigenvalue {lam[0]:.3e})"
            )
        B[k] = (Q / np.sqrt(lam)) @ Q.T
        Binv[k] = (Q * np.sqrt(lam)) @ Q.T
    white = np.matmul(B, stack.data)
    return DatasetStack(white), WhiteningInfo(B, Binv)


def project_rows(W: np.ndarray, R: EmpiricalCovariance) -> np.ndarray:
    """Products of covariance blocks with demixing rows.

    Returns ``T`` of shape ``(K, N, K, N)`` with
    ``T[l, n, k] = block(k, l) @ W[l, n]``. Both the SCV Gram matrices and the
    partial gradient in ``W`` are cheap contractions of ``T``.
    """
    K, N = R.K, R.N
    rows = R.matrix.reshape(K, N, K * N)
    # R symmetric: W[l] @ (block row l) holds block(k, l) @ w_n^[l] in column slab k
    return np.matmul(W, rows).reshape(K, N, K, N)


def scv_grams(W: np.ndarray, R: EmpiricalCovariance, T: np.ndarray | None = None) -> np.ndarray:
    """All N Gram matrices ``W_n R W_n^T`` as an ``(N, K, K)`` array."""
    if T is None:
        T = project_rows(W, R)
    G = np.einsum("knm,lnkm->nkl", W, T)
    return 0.5 * (G + G.transpose(0, 2, 1))


def scv_gram(W: np.ndarray, R: EmpiricalCovariance, n: int) -> np.ndarray:
    """``W_n R W_n^T`` for a single source index ``n`` (0-based)."""
    K, N = R.K, R.N
    rows = W[:, n, :]  # (K, N): w_n^[k] for every k
    G = np.einsum("ki,kilj,lj->kl", rows, R.blocks, rows)
    return 0.5 * (G + G.T)


def is_nonsingular(W: np.ndarray, floor: float = 0.0) -> bool:
    """True when every slice has finite entries and ``|det| > floor``."""
    if not np.all(np.isfinite(W)):
        return False
    sign, logdet = np.linalg.slogdet(W)
    if np.any(sign == 0):
        return False
    if floor > 0:
        return bool(np.all(logdet > np.log(floor)))
    return True


def is_feasible_precision(C: np.ndarray, epsilon: float, rtol: float = 1e-12) -> bool:
    """Symmetry to ``rtol`` and smallest eigenvalue at least ``epsilon`` for every slice."""
    if not np.all(np.isfinite(C)):
        return False
    scale = np.maximum(np.abs(C).max(axis=(1, 2)), 1.0)
    asym = np.abs(C - C.transpose(0, 2, 1)).max(axis=(1, 2))
    if np.any(asym > rtol * scale):
        return False
    lam = np.linalg.eigvalsh(0.5 * (C + C.transpose(0, 2, 1)))
    return bool(np.all(lam[:, 0] >= epsilon - rtol * scale))
