"""Command-line interface: ``palmiva generate | solve | benchmark | jisi``.

Exit codes: 0 success, 1 configuration error, 2 numerical failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import fileio
from .bench import ALGOS, RAW_COLUMNS, ExperimentConfig, prepare, run_algo, run_benchmark, trial_seed
from .errors import ConfigError, DegenerateInputError, DimensionError, NumericalFailure, RankDeficiencyError
from .evaluation import TrialResult, jisi, score_in_original_space
from .synthgen import generate_trial
from .tensor_model import Dims

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("palmiva")


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _parse_overrides(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"solver option {item!r} must look like key=value")
        key, value = item.split("=", 1)
        out[key.strip()] = _parse_value(value.strip())
    return out


def _experiment_config(args) -> ExperimentConfig:
    base = ExperimentConfig.from_json(args.config).to_dict() if args.config else {}
    cli = {
        "cases": args.cases,
        "K_list": args.K,
        "N_list": args.N,
        "V": args.V,
        "n_trials": args.trials,
        "base_seed": args.base_seed,
        "output_dir": args.out,
    }
    if hasattr(args, "algos"):
        cli["algos"] = args.algos
        cli["workers"] = args.workers
        palm = _parse_overrides(args.palm_opt)
        ivagv = _parse_overrides(args.ivagv_opt)
        if palm:
            cli["palm"] = {**base.get("palm", {}), **palm}
        if ivagv:
            cli["ivagv"] = {**base.get("ivagv", {}), **ivagv}
    base.update({k: v for k, v in cli.items() if v is not None})
    return ExperimentConfig.from_dict(base).validate()


def trial_dir(out: Path, case: str, K: int, N: int, trial: int) -> Path:
    return out / f"{case}_K{K}_N{N}_t{trial:03d}"


def cmd_generate(args) -> int:
    cfg = _experiment_config(args)
    out = Path(cfg.output_dir)
    for case in cfg.cases:
        for K in cfg.K_list:
            for N in cfg.N_list:
                for trial in range(cfg.n_trials):
                    seed = trial_seed(cfg.base_seed, case, K, N, trial)
                    truth, stack = generate_trial(case, Dims(K, N, cfg.V), seed)
                    d = trial_dir(out, case, K, N, trial)
                    d.mkdir(parents=True, exist_ok=True)
                    fileio.write_dataset(d / "data.json", stack)
                    fileio.write_ground_truth(d / "truth.json", truth, seed, cfg.V)
                    print(d)
    return EXIT_OK


def cmd_solve(args) -> int:
    data_path = Path(args.dataset)
    truth_path = Path(args.truth) if args.truth else data_path.with_name("truth.json")
    overrides = _parse_overrides(args.opt)
    probe = ExperimentConfig(algos=[args.algo], **{args.algo: overrides})
    probe.validate()
    palm_cfg, ivagv_cfg = probe.palm_config(), probe.ivagv_config()

    stack = fileio.read_dataset(data_path)
    truth, header = fileio.read_ground_truth(truth_path)
    K, N, V = stack.dims
    R, info = prepare(stack)
    try:
        W_white, trace, elapsed = run_algo(args.algo, R, palm_cfg, ivagv_cfg)
    except NumericalFailure as exc:
        if exc.trace is not None:
            dump = Path(args.trace or data_path.with_name(f"trace_{args.algo}.json"))
            dump.write_text(json.dumps(exc.trace.to_dict()) + "\n")
        raise
    score = score_in_original_space(W_white, info, truth.A)
    result = TrialResult(
        header.get("case", truth.case_label), K, N, V, args.algo, int(header.get("seed", 0)),
        score, elapsed, trace.iterations, float(trace.cost[-1]), bool(trace.converged),
    )
    result_path = Path(args.result or data_path.with_name(f"result_{args.algo}.csv"))
    with open(result_path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=RAW_COLUMNS)
        w.writeheader()
        w.writerow(result.as_row())
    if args.trace:
        Path(args.trace).write_text(json.dumps(trace.to_dict()) + "\n")
    # demixer in original coordinates, so it can be scored directly against A
    W = np.matmul(W_white, info.matrices)
    fileio.write_demixing(args.save_w or data_path.with_name(f"W_{args.algo}.json"), W)
    print(f"{args.algo}: jisi={score:.6e} iterations={trace.iterations} "
          f"time={elapsed:.3f}s converged={trace.converged}")
    return EXIT_OK


def cmd_benchmark(args) -> int:
    cfg = _experiment_config(args)
    results, summary = run_benchmark(cfg)
    for s in summary:
        print(f"{s.case_label} K={s.K} N={s.N} {s.algo:5s} mu_jisi={s.mu_jisi:.3e} "
              f"sigma_jisi={s.sigma_jisi:.3e} mu_T={s.mu_time:.3f}s n={s.n_trials}")
    failed = sum(r.status != "ok" for r in results)
    if failed:
        print(f"{failed} trial(s) failed; see raw.csv", file=sys.stderr)
    return EXIT_OK


def cmd_jisi(args) -> int:
    W = fileio.read_demixing(args.demixing)
    truth, _ = fileio.read_ground_truth(args.truth)
    print(f"{jisi(W, truth.A):.12e}")
    return EXIT_OK


def _add_grid_args(p, with_algos: bool):
    p.add_argument("--config", help="JSON file with ExperimentConfig fields; flags override it")
    p.add_argument("--cases", nargs="+", choices=["A", "B", "C", "D"])
    p.add_argument("--K", nargs="+", type=int, help="dataset counts")
    p.add_argument("--N", nargs="+", type=int, help="sources per dataset")
    p.add_argument("--V", type=int, help="samples per dataset")
    p.add_argument("--trials", type=int, help="trials per grid cell")
    p.add_argument("--base-seed", type=int)
    p.add_argument("--out", help="output directory")
    if with_algos:
        p.add_argument("--algos", nargs="*", choices=list(ALGOS))
        p.add_argument("--workers", type=int, help="worker processes (IVA_THREADS overrides)")
        p.add_argument("--palm-opt", action="append", metavar="KEY=VALUE")
        p.add_argument("--ivagv-opt", action="append", metavar="KEY=VALUE")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="palmiva", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write synthetic datasets and ground truth")
    _add_grid_args(p, with_algos=False)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="run one solver on a dataset file")
    p.add_argument("dataset", help="dataset header (.json)")
    p.add_argument("--truth", help="ground-truth header (default: truth.json next to the dataset)")
    p.add_argument("--algo", choices=list(ALGOS), default="palm")
    p.add_argument("--opt", action="append", metavar="KEY=VALUE", help="solver option override")
    p.add_argument("--result", help="CSV path for the result row")
    p.add_argument("--trace", help="write the solver trace as JSON")
    p.add_argument("--save-w", help="header path for the estimated demixing tensor")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("benchmark", help="run the case x dimension x trial grid")
    _add_grid_args(p, with_algos=True)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("jisi", help="score a demixing file against a ground-truth file")
    p.add_argument("demixing")
    p.add_argument("truth")
    p.set_defaults(func=cmd_jisi)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, RankDeficiencyError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DimensionError, DegenerateInputError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
