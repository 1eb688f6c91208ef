"""Monte-Carlo benchmark harness: cases x dimensions x algorithms x trials."""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .baseline_ivagv import IvagvConfig, ivagv_solve
from .errors import ConfigError, PalmIvaError
from .evaluation import SummaryRow, TrialResult, score_in_original_space, summarize
from .palm_solver import PalmConfig, palm_solve
from .rng import derive_seed
from .synthgen import CASES, generate_trial
from .tensor_model import Dims, center, empirical_covariance, whiten

__all__ = [
    "ALGOS",
    "RAW_COLUMNS",
    "ExperimentConfig",
    "trial_seed",
    "prepare",
    "run_algo",
    "run_trial",
    "run_benchmark",
    "write_raw_csv",
    "read_raw_csv",
    "write_summary_csv",
]

log = logging.getLogger(__name__)

ALGOS = ("palm", "ivagv")
RAW_COLUMNS = [
    "case", "K", "N", "V", "algo", "seed", "jisi", "time_s",
    "iterations", "final_cost", "converged", "status",
]
SUMMARY_COLUMNS = [
    "case", "K", "N", "V", "algo", "mu_jisi", "sigma_jisi",
    "mu_time", "sigma_time", "n_trials", "single_trial",
]


@dataclass
class ExperimentConfig:
    cases: list = field(default_factory=lambda: ["A", "B", "C", "D"])
    K_list: list = field(default_factory=lambda: [5])
    N_list: list = field(default_factory=lambda: [10])
    V: int = 10000
    n_trials: int = 20
    base_seed: int = 0
    algos: list = field(default_factory=lambda: list(ALGOS))
    palm: dict = field(default_factory=dict)
    ivagv: dict = field(default_factory=dict)
    output_dir: str = "results"
    workers: int = 1

    def __post_init__(self):
        self.cases = list(self.cases)
        self.K_list = [int(k) for k in self.K_list]
        self.N_list = [int(n) for n in self.N_list]
        self.algos = list(self.algos)

    def validate(self) -> "ExperimentConfig":
        if not self.algos:
            raise ConfigError("algos: at least one algorithm is required")
        bad = [a for a in self.algos if a not in ALGOS]
        if bad:
            raise ConfigError(f"algos: unknown algorithm(s) {bad}; expected a subset of {list(ALGOS)}")
        if not self.cases:
            raise ConfigError("cases: at least one case is required")
        bad = [c for c in self.cases if c not in CASES]
        if bad:
            raise ConfigError(f"cases: unknown case(s) {bad}; expected a subset of {sorted(CASES)}")
        if not self.K_list or min(self.K_list) < 1:
            raise ConfigError("K_list: needs positive entries")
        if not self.N_list or min(self.N_list) < 2:
            raise ConfigError("N_list: entries must be at least 2 for jISI to be defined")
        if self.V <= max(self.K_list) * max(self.N_list):
            raise ConfigError(f"V: must exceed max(K)*max(N) = {max(self.K_list) * max(self.N_list)}")
        if self.n_trials < 1:
            raise ConfigError("n_trials: must be at least 1")
        if self.workers < 1:
            raise ConfigError("workers: must be at least 1")
        # surface bad solver overrides before any work is done
        self.palm_config()
        self.ivagv_config()
        return self

    def palm_config(self) -> PalmConfig:
        return _build(PalmConfig, self.palm, "palm")

    def ivagv_config(self) -> IvagvConfig:
        return _build(IvagvConfig, self.ivagv, "ivagv")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config field(s): {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _build(klass, overrides: dict, label: str):
    names = {f.name for f in dataclasses.fields(klass)}
    unknown = set(overrides) - names
    if unknown:
        raise ConfigError(f"{label}: unknown solver option(s) {sorted(unknown)}")
    try:
        return klass(**overrides)
    except ConfigError as exc:
        raise ConfigError(f"{label}: {exc}") from None
    except TypeError as exc:
        raise ConfigError(f"{label}: {exc}") from None


def trial_seed(base_seed: int, case: str, K: int, N: int, trial: int) -> int:
    return derive_seed(base_seed, "trial", "ABCD".index(case), K, N, trial)


def prepare(stack):
    """Center, whiten and compute the covariance the solvers consume."""
    white, info = whiten(center(stack))
    return empirical_covariance(white), info


def run_algo(algo: str, R, palm_cfg: PalmConfig, ivagv_cfg: IvagvConfig):
    """Run one solver; returns ``(W_white, trace, wall_seconds)``."""
    t0 = time.perf_counter()
    if algo == "palm":
        W, _, trace = palm_solve(R, palm_cfg)
    elif algo == "ivagv":
        W, trace = ivagv_solve(R, ivagv_cfg)
    else:
        raise ConfigError(f"unknown algorithm {algo!r}")
    return W, trace, time.perf_counter() - t0


def run_trial(task) -> list[TrialResult]:
    """Generate one dataset and run every requested algorithm on it.

    ``task`` is ``(case, K, N, V, seed, algos, palm_overrides, ivagv_overrides)``.
    Solver failures become rows with a non-``ok`` status.
    """
    case, K, N, V, seed, algos, palm_over, ivagv_over = task
    palm_cfg = PalmConfig(**palm_over)
    ivagv_cfg = IvagvConfig(**ivagv_over)
    truth, stack = generate_trial(case, Dims(K, N, V), seed)
    R, info = prepare(stack)
    rows = []
    for algo in algos:
        try:
            W, trace, elapsed = run_algo(algo, R, palm_cfg, ivagv_cfg)
            score = score_in_original_space(W, info, truth.A)
            rows.append(TrialResult(
                case, K, N, V, algo, seed, score, elapsed,
                trace.iterations, float(trace.cost[-1]), bool(trace.converged),
            ))
        except PalmIvaError as exc:
            log.warning("trial %s K=%d N=%d seed=%d algo=%s failed: %s", case, K, N, seed, algo, exc)
            rows.append(TrialResult(
                case, K, N, V, algo, seed, math.nan, math.nan, 0, math.nan, False,
                status=f"failed: {type(exc).__name__}",
            ))
    return rows


def _tasks(cfg: ExperimentConfig):
    tasks = []
    seeds = set()
    for case in cfg.cases:
        for K in cfg.K_list:
            for N in cfg.N_list:
                for trial in range(cfg.n_trials):
                    seed = trial_seed(cfg.base_seed, case, K, N, trial)
                    if seed in seeds:
                        raise ConfigError(f"trial seed collision at {case} K={K} N={N} trial={trial}")
                    seeds.add(seed)
                    tasks.append((case, K, N, cfg.V, seed, tuple(cfg.algos), cfg.palm, cfg.ivagv))
    return tasks


def _workers(cfg: ExperimentConfig) -> int:
    env = os.environ.get("IVA_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"IVA_THREADS must be an integer, got {env!r}") from None
    return cfg.workers


def run_benchmark(cfg: ExperimentConfig, write: bool = True):
    """Execute the full grid; optionally write raw, summary and plot-data files.

    Returns ``(results, summary)``.
    """
    cfg.validate()
    tasks = _tasks(cfg)
    workers = _workers(cfg)
    results: list[TrialResult] = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for rows in pool.map(run_trial, tasks):
                results.extend(rows)
    else:
        for task in tasks:
            results.extend(run_trial(task))
    # deterministic merge: grid coordinates, then trial index
    order = {t[4]: i for i, t in enumerate(tasks)}
    results.sort(key=lambda r: (r.case_label, r.K, r.N, r.algo, order[r.seed]))
    summary = summarize(results)
    if write:
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_raw_csv(out / "raw.csv", results)
        write_summary_csv(out / "summary.csv", summary)
        write_scatter(out / "scatter.tsv", summary)
        write_table(out / "table.tsv", summary)
        (out / "config.json").write_text(json.dumps(cfg.to_dict(), indent=2) + "\n")
    return results, summary


def write_raw_csv(path, results) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=RAW_COLUMNS)
        w.writeheader()
        for r in results:
            w.writerow(r.as_row())


def read_raw_csv(path) -> list[TrialResult]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(TrialResult(
                case_label=row["case"], K=int(row["K"]), N=int(row["N"]), V=int(row["V"]),
                algo=row["algo"], seed=int(row["seed"]), jisi=float(row["jisi"]),
                time_s=float(row["time_s"]), iterations=int(row["iterations"]),
                final_cost=float(row["final_cost"]), converged=row["converged"] == "True",
                status=row["status"],
            ))
    return out


def write_summary_csv(path, summary: list[SummaryRow]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SUMMARY_COLUMNS)
        for s in summary:
            w.writerow([s.case_label, s.K, s.N, s.V, s.algo, s.mu_jisi, s.sigma_jisi,
                        s.mu_time, s.sigma_time, s.n_trials, s.single_trial])


def write_scatter(path, summary: list[SummaryRow]) -> None:
    """Crosshair data: centre (mu_T, mu_jISI), half-widths (sigma_T, sigma_jISI)."""
    with open(path, "w") as fh:
        fh.write("case\tK\tN\talgo\tmu_T\tmu_jisi\tsigma_T\tsigma_jisi\n")
        for s in summary:
            fh.write(f"{s.case_label}\t{s.K}\t{s.N}\t{s.algo}\t{s.mu_time!r}\t{s.mu_jisi!r}"
                     f"\t{s.sigma_time!r}\t{s.sigma_jisi!r}\n")


def write_table(path, summary: list[SummaryRow]) -> None:
    """Table layout: one row per (algo, case, statistic), one column per (K, N)."""
    dims = sorted({(s.K, s.N) for s in summary})
    index = {(s.algo, s.case_label, s.K, s.N): s for s in summary}
    algos = [a for a in ALGOS if any(s.algo == a for s in summary)]
    cases = sorted({s.case_label for s in summary})
    with open(path, "w") as fh:
        fh.write("algo\tcase\tstat\t" + "\t".join(f"K={K},N={N}" for K, N in dims) + "\n")
        for algo in algos:
            for case in cases:
                for stat, attr in (("mu_jisi", "mu_jisi"), ("mu_T", "mu_time")):
                    cells = []
                    for K, N in dims:
                        s = index.get((algo, case, K, N))
                        cells.append(f"{getattr(s, attr):.2E}" if s else "")
                    fh.write(f"{algo}\t{case}\t{stat}\t" + "\t".join(cells) + "\n")


def recompute_summary(path) -> list[SummaryRow]:
    return summarize(read_raw_csv(path))
