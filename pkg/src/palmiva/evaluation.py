"""Separation quality (jISI) and aggregation of trial results."""

from __future__ import annotations

import logging
import math
from collections import OrderedDict
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DegenerateInputError, DimensionError
from .tensor_model import WhiteningInfo

__all__ = ["TrialResult", "SummaryRow", "jisi", "score_in_original_space", "summarize"]

log = logging.getLogger(__name__)


@dataclass
class TrialResult:
    case_label: str
    K: int
    N: int
    V: int
    algo: str
    seed: int
    jisi: float
    time_s: float
    iterations: int
    final_cost: float
    converged: bool
    status: str = "ok"

    def __post_init__(self):
        if self.status == "ok":
            if not 0.0 <= self.jisi <= 1.0:
                raise ValueError(f"jisi must lie in [0, 1], got {self.jisi}")
            if self.time_s < 0:
                raise ValueError("time_s must be nonnegative")

    def as_row(self) -> dict:
        row = asdict(self)
        row["case"] = row.pop("case_label")
        return row


@dataclass
class SummaryRow:
    case_label: str
    K: int
    N: int
    V: int
    algo: str
    mu_jisi: float
    sigma_jisi: float
    mu_time: float
    sigma_time: float
    n_trials: int
    single_trial: bool


def jisi(W, A) -> float:
    """Joint inter-symbol interference of demixing ``W`` against mixing ``A``.

    0 means every ``W[k] @ A[k]`` is the same scaled permutation matrix; 1 is
    the worst case.
    """
    W = np.asarray(W, dtype=float)
    A = np.asarray(A, dtype=float)
    if W.shape != A.shape or W.ndim != 3 or W.shape[1] != W.shape[2]:
        raise DimensionError(f"shape mismatch: W {W.shape}, A {A.shape}")
    N = W.shape[1]
    if N < 2:
        raise DegenerateInputError("jISI is undefined for N < 2")
    gbar = np.abs(np.matmul(W, A)).sum(axis=0)
    row_max = gbar.max(axis=1)
    col_max = gbar.max(axis=0)
    if not (np.all(row_max > 0) and np.all(col_max > 0)):
        raise DegenerateInputError("aggregated gain matrix has an all-zero row or column")
    rows = (gbar / row_max[:, None]).sum(axis=1) - 1.0
    cols = (gbar / col_max[None, :]).sum(axis=0) - 1.0
    return float((rows.sum() + cols.sum()) / (2 * N * (N - 1)))


def score_in_original_space(W_white, B: WhiteningInfo, A) -> float:
    """jISI of a demixer estimated on whitened data, scored against the original mixing."""
    return jisi(W_white, np.matmul(B.matrices, A))


def _std(x: list[float]) -> float:
    if len(x) < 2:
        return 0.0
    return float(np.std(x, ddof=1))


def summarize(results) -> list[SummaryRow]:
    """Group by ``(case, K, N, V, algo)`` and report mean and sample std of jISI and time.

    Failed trials (``status != "ok"``) are excluded; groups left empty are
    skipped with a warning.
    """
    groups: "OrderedDict[tuple, list[TrialResult]]" = OrderedDict()
    for r in results:
        key = (r.case_label, r.K, r.N, r.V, r.algo)
        groups.setdefault(key, []).append(r)
    rows = []
    for key in sorted(groups):
        ok = [r for r in groups[key] if r.status == "ok"]
        if not ok:
            log.warning("no successful trials for group %s; skipped", key)
            continue
        j = [r.jisi for r in ok]
        t = [r.time_s for r in ok]
        rows.append(
            SummaryRow(
                *key,
                mu_jisi=math.fsum(j) / len(j),
                sigma_jisi=_std(j),
                mu_time=math.fsum(t) / len(t),
                sigma_time=_std(t),
                n_trials=len(ok),
                single_trial=len(ok) == 1,
            )
        )
    return rows
