"""Command line entry points.

Subcommands: ``synth`` writes instance files, ``decompose`` factors a
single tensor file into JSON, ``rank`` reports the estimated factor
count, and ``bench`` runs a configured sweep into CSV plus a summary
JSON. Exit codes: 0 on success, 2 for configuration errors, 3 for I/O
errors. ``ORTHOTENSOR_SEED`` provides the base seed when no --seed flag
or config value is given.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import io as tio
from .bench import ConfigError, parse_config_file, run_experiment, summarize
from .pursuit import PursuitOptions, decompose
from .rank import select_rank
from .synth import FACTOR_MODES, NOISE_MODELS, NoiseSpec, gen_instance
from .tpm import TpmOptions, tpm_decompose

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3


def _env_seed() -> int | None:
    raw = os.environ.get("ORTHOTENSOR_SEED")
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"ORTHOTENSOR_SEED must be an integer, got {raw!r}")


def _resolve_seed(flag_value: int | None, default: int = 0) -> int:
    if flag_value is not None:
        return flag_value
    env = _env_seed()
    return default if env is None else env


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orthotensor",
        description="Symmetric tensor decomposition benchmark toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate planted instance files")
    p_synth.add_argument("--k", type=int, required=True, help="tensor order")
    p_synth.add_argument("--d", type=int, required=True, help="dimension")
    p_synth.add_argument("--r", type=int, required=True, help="number of factors")
    p_synth.add_argument("--noise", choices=NOISE_MODELS, default="gaussian")
    p_synth.add_argument("--sigma", type=float, default=0.0)
    p_synth.add_argument("--factor-mode", choices=FACTOR_MODES, default="canonical")
    p_synth.add_argument("--seed", type=int, default=None)
    p_synth.add_argument("--count", type=int, default=1, help="number of instances")
    p_synth.add_argument("--out", type=Path, default=Path("."))

    p_dec = sub.add_parser("decompose", help="factor a tensor file")
    p_dec.add_argument("tensor", type=Path)
    p_dec.add_argument("--r", type=int, required=True)
    p_dec.add_argument("--method", choices=("tmhosvd", "tpm"), default="tmhosvd")
    p_dec.add_argument("--seed", type=int, default=None, help="TPM restart seed")
    p_dec.add_argument("--out", type=Path, default=None, help="JSON output path")

    p_rank = sub.add_parser("rank", help="estimate the number of factors")
    p_rank.add_argument("tensor", type=Path)
    p_rank.add_argument("--objective-threshold", type=float, default=0.9)
    p_rank.add_argument("--rank-tol", type=float, default=1e-6)
    p_rank.add_argument("--out", type=Path, default=None, help="JSON output path")

    p_bench = sub.add_parser("bench", help="run a configured sweep")
    p_bench.add_argument("--config", type=Path, required=True)
    p_bench.add_argument("--seed", type=int, default=None)
    p_bench.add_argument("--out", type=Path, default=Path("."))
    p_bench.add_argument("--method", choices=("tmhosvd", "tpm", "all"), default=None)
    p_bench.add_argument("--threads", type=int, default=None)
    return parser


def _cmd_synth(args) -> int:
    base_seed = _resolve_seed(args.seed)
    args.out.mkdir(parents=True, exist_ok=True)
    spec = NoiseSpec(model=args.noise, sigma=args.sigma)
    for i in range(args.count):
        seed = base_seed + i
        inst = gen_instance(
            args.d, args.k, args.r, spec, factor_mode=args.factor_mode, seed=seed
        )
        stem = f"instance_k{args.k}_d{args.d}_r{args.r}_s{seed}"
        tio.write_tensor(args.out / f"{stem}.otsn", inst.tensor)
        tio.write_instance_sidecar(args.out / f"{stem}.json", inst, spec)
        print(args.out / f"{stem}.otsn")
    return EXIT_OK


def _cmd_decompose(args) -> int:
    t = tio.read_tensor(args.tensor)
    if args.method == "tmhosvd":
        estimates = decompose(t, args.r, PursuitOptions())
    else:
        estimates = tpm_decompose(t, args.r, TpmOptions(seed=_resolve_seed(args.seed)))
    doc = {
        "method": args.method,
        "order": t.order,
        "dim": t.dim,
        "r": args.r,
        "factors": [
            {
                "u": est.u_hat.tolist(),
                "lambda": est.lambda_hat,
                "objective": est.objective,
                "iteration": est.iteration,
                "converged": est.converged,
            }
            for est in estimates
        ],
    }
    _emit_json(doc, args.out)
    return EXIT_OK


def _cmd_rank(args) -> int:
    t = tio.read_tensor(args.tensor)
    report = select_rank(
        t, objective_threshold=args.objective_threshold, rank_tol=args.rank_tol
    )
    doc = {
        "r_hat": report.r_hat,
        "n_relaxed": report.n_relaxed,
        "filtered_set": report.filtered_set,
        "sorted_lambda_sq": report.sorted_lambda_sq.tolist(),
        "elbow_scores": [
            None if not np.isfinite(s) else float(s) for s in report.elbow_scores
        ],
        "objective_threshold": report.objective_threshold,
        "rank_tol": report.rank_tol,
        "candidates": [
            {"objective": c.objective, "lambda": c.lambda_hat, "converged": c.converged}
            for c in report.candidates
        ],
    }
    _emit_json(doc, args.out)
    return EXIT_OK


def _cmd_bench(args) -> int:
    overrides: dict = {}
    if args.seed is not None:
        overrides["base_seed"] = str(args.seed)
    if args.method is not None:
        overrides["methods"] = "tmhosvd tpm" if args.method == "all" else args.method
    if args.threads is not None:
        overrides["threads"] = str(args.threads)
    env = _env_seed()
    defaults = {"base_seed": str(env)} if env is not None else None
    configs = parse_config_file(args.config, overrides=overrides, defaults=defaults)
    args.out.mkdir(parents=True, exist_ok=True)
    csv_path = args.out / "results.csv"
    all_rows = []
    for config in configs:
        config = dataclasses.replace(config, csv_path=str(csv_path))
        rows = run_experiment(config)
        all_rows.extend(rows)
        print(f"[{config.name}] {len(rows)} rows -> {csv_path}")
    summary = summarize(all_rows)
    summary_path = args.out / "summary.json"
    summary_path.write_text(json.dumps(summary, indent=2) + "\n")
    print(summary_path)
    return EXIT_OK


def _emit_json(doc: dict, out: Path | None) -> None:
    text = json.dumps(doc, indent=2) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "synth": _cmd_synth,
        "decompose": _cmd_decompose,
        "rank": _cmd_rank,
        "bench": _cmd_bench,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, IOError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
