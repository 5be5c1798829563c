"""Reproducible experiment harness: seeded sweeps over noise levels,
timing, CSV persistence, and summary statistics.

Each (scenario, trial) pair owns a seed derived purely from the base seed
and the scenario coordinates (including the noise level's bit pattern),
so re-running any single cell in isolation regenerates the exact instance
used in a full sweep. All methods in a scenario share the instance.

CSV rows are written incrementally in a fixed deterministic order; an
interrupted sweep can be resumed, because rows already present in the
output file (keyed by method, scenario, trial) are skipped. Wall-clock
runtime is the only nondeterministic column.
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .metrics import match_and_score, residual_norms
from .pursuit import PursuitOptions, decompose
from .synth import NOISE_MODELS, NoiseSpec, gen_instance
from .tpm import TpmOptions, tpm_decompose

METHODS = ("tmhosvd", "tpm")

CSV_FIELDS = (
    "method",
    "k",
    "d",
    "r",
    "noise_model",
    "sigma",
    "trial",
    "seed",
    "avg_loss",
    "max_loss",
    "avg_lambda_loss",
    "residual_frob",
    "rank_hat",
    "runtime_ms",
    "converged_count",
)


class ConfigError(ValueError):
    """Invalid experiment configuration (maps to CLI exit code 2)."""


@dataclass(frozen=True)
class ExperimentConfig:
    k: int
    d: int
    r: int
    noise_model: str = "gaussian"
    sigmas: tuple[float, ...] = (0.0,)
    factor_mode: str = "canonical"
    trials: int = 50
    base_seed: int = 0
    methods: tuple[str, ...] = ("tmhosvd",)
    pursuit: PursuitOptions = field(default_factory=PursuitOptions)
    tpm: TpmOptions = field(default_factory=TpmOptions)
    csv_path: str | None = None
    threads: int = 1
    name: str = "scenario"

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.methods:
            raise ConfigError("at least one method is required")
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}")
        if self.noise_model not in NOISE_MODELS:
            raise ConfigError(f"unknown noise model {self.noise_model!r}")
        if any(s < 0 for s in self.sigmas):
            raise ConfigError("sigma values must be >= 0")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")


@dataclass(frozen=True)
class ResultRow:
    method: str
    k: int
    d: int
    r: int
    noise_model: str
    sigma: float
    trial: int
    seed: int
    avg_loss: float
    max_loss: float
    avg_lambda_loss: float
    residual_frob: float
    rank_hat: int | None
    runtime_ms: float
    converged_count: int

    def to_csv(self) -> list[str]:
        return [
            self.method,
            str(self.k),
            str(self.d),
            str(self.r),
            self.noise_model,
            repr(float(self.sigma)),
            str(self.trial),
            str(self.seed),
            repr(float(self.avg_loss)),
            repr(float(self.max_loss)),
            repr(float(self.avg_lambda_loss)),
            repr(float(self.residual_frob)),
            "" if self.rank_hat is None else str(self.rank_hat),
            repr(float(self.runtime_ms)),
            str(self.converged_count),
        ]

    def key(self) -> tuple:
        return (
            self.method,
            str(self.k),
            str(self.d),
            str(self.r),
            self.noise_model,
            repr(float(self.sigma)),
            str(self.trial),
        )


def derive_trial_seed(
    base_seed: int,
    k: int,
    d: int,
    r: int,
    noise_model: str,
    sigma: float,
    trial: int,
) -> int:
    """Pure seed derivation; the sigma value enters via its float64 bits,
    so the seed does not depend on its position in the sweep."""
    model_id = NOISE_MODELS.index(noise_model)
    sigma_bits = int(np.float64(sigma).view(np.uint64))
    ss = np.random.SeedSequence(
        [int(base_seed), int(k), int(d), int(r), model_id, sigma_bits, int(trial)]
    )
    return int(ss.generate_state(1, np.uint64)[0])


def _run_trial(config: ExperimentConfig, sigma: float, trial: int) -> list[ResultRow]:
    seed = derive_trial_seed(
        config.base_seed, config.k, config.d, config.r, config.noise_model, sigma, trial
    )
    spec = NoiseSpec(model=config.noise_model, sigma=sigma)
    inst = gen_instance(
        config.d, config.k, config.r, spec, factor_mode=config.factor_mode, seed=seed
    )
    rows = []
    for method in config.methods:
        try:
            t0 = time.perf_counter()
            if method == "tmhosvd":
                estimates = decompose(inst.tensor, config.r, config.pursuit)
            else:
                estimates = tpm_decompose(
                    inst.tensor,
                    config.r,
                    replace(config.tpm, seed=inst.subseeds.method),
                )
            runtime_ms = (time.perf_counter() - t0) * 1e3
            score = match_and_score(estimates, inst.truth)
            res_frob, _ = residual_norms(inst.tensor, estimates)
            row = ResultRow(
                method=method,
                k=config.k,
                d=config.d,
                r=config.r,
                noise_model=config.noise_model,
                sigma=sigma,
                trial=trial,
                seed=seed,
                avg_loss=score.avg_loss,
                max_loss=score.max_loss,
                avg_lambda_loss=float(np.mean(score.lambda_losses)),
                residual_frob=res_frob,
                rank_hat=None,
                runtime_ms=runtime_ms,
                converged_count=sum(e.converged for e in estimates),
            )
        except Exception:
            row = ResultRow(
                method=method,
                k=config.k,
                d=config.d,
                r=config.r,
                noise_model=config.noise_model,
                sigma=sigma,
                trial=trial,
                seed=seed,
                avg_loss=float("nan"),
                max_loss=float("nan"),
                avg_lambda_loss=float("nan"),
                residual_frob=float("nan"),
                rank_hat=None,
                runtime_ms=0.0,
                converged_count=0,
            )
        rows.append(row)
    return rows


def _existing_keys(csv_path: Path) -> set[tuple]:
    keys: set[tuple] = set()
    if not csv_path.exists():
        return keys
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        for rec in reader:
            keys.add(
                (
                    rec["method"],
                    rec["k"],
                    rec["d"],
                    rec["r"],
                    rec["noise_model"],
                    rec["sigma"],
                    rec["trial"],
                )
            )
    return keys


def run_experiment(config: ExperimentConfig) -> list[ResultRow]:
    """Run every (sigma, trial, method) cell of the config.

    When config.csv_path is set, rows are appended scenario by scenario
    (header first if the file is new) and cells already present in the
    file are skipped. Trials may run on a thread pool; output order is
    deterministic regardless.
    """
    csv_path = Path(config.csv_path) if config.csv_path else None
    existing: set[tuple] = set()
    writer_fh = None
    writer = None
    if csv_path is not None:
        try:
            existing = _existing_keys(csv_path)
            fresh = not csv_path.exists() or not existing
            csv_path.parent.mkdir(parents=True, exist_ok=True)
            writer_fh = open(csv_path, "a", newline="", encoding="utf-8")
            writer = csv.writer(writer_fh)
            if fresh and writer_fh.tell() == 0:
                writer.writerow(CSV_FIELDS)
                writer_fh.flush()
        except OSError as exc:
            raise IOError(f"cannot open {csv_path}: {exc}") from exc

    all_rows: list[ResultRow] = []
    try:
        for sigma in config.sigmas:
            todo = [
                trial
                for trial in range(config.trials)
                if not _trial_done(config, sigma, trial, existing)
            ]
            done_rows: dict[int, list[ResultRow]] = {}
            if config.threads > 1 and len(todo) > 1:
                with ThreadPoolExecutor(max_workers=config.threads) as pool:
                    futures = {
                        trial: pool.submit(_run_trial, config, sigma, trial)
                        for trial in todo
                    }
                    for trial, fut in futures.items():
                        done_rows[trial] = fut.result()
            else:
                for trial in todo:
                    done_rows[trial] = _run_trial(config, sigma, trial)
            for trial in sorted(done_rows):
                for row in done_rows[trial]:
                    all_rows.append(row)
                    if writer is not None:
                        writer.writerow(row.to_csv())
            if writer_fh is not None:
                writer_fh.flush()
    finally:
        if writer_fh is not None:
            writer_fh.close()
    return all_rows


def _trial_done(
    config: ExperimentConfig, sigma: float, trial: int, existing: set[tuple]
) -> bool:
    if not existing:
        return False
    return all(
        (
            method,
            str(config.k),
            str(config.d),
            str(config.r),
            config.noise_model,
            repr(float(sigma)),
            str(trial),
        )
        in existing
        for method in config.methods
    )


def read_rows(csv_path: str | Path) -> list[ResultRow]:
    rows = []
    with open(csv_path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append(
                ResultRow(
                    method=rec["method"],
                    k=int(rec["k"]),
                    d=int(rec["d"]),
                    r=int(rec["r"]),
                    noise_model=rec["noise_model"],
                    sigma=float(rec["sigma"]),
                    trial=int(rec["trial"]),
                    seed=int(rec["seed"]),
                    avg_loss=float(rec["avg_loss"]),
                    max_loss=float(rec["max_loss"]),
                    avg_lambda_loss=float(rec["avg_lambda_loss"]),
                    residual_frob=float(rec["residual_frob"]),
                    rank_hat=int(rec["rank_hat"]) if rec["rank_hat"] else None,
                    runtime_ms=float(rec["runtime_ms"]),
                    converged_count=int(rec["converged_count"]),
                )
            )
    return rows


def summarize(rows: list[ResultRow]) -> dict:
    """Per-cell aggregates: mean/median and 5/95 quantiles of the average
    loss, plus mean runtime. Cells are keyed by method and scenario."""
    cells: dict[tuple, list[ResultRow]] = {}
    for row in rows:
        key = (row.method, row.k, row.d, row.r, row.noise_model, row.sigma)
        cells.setdefault(key, []).append(row)
    out = []
    for key in sorted(cells):
        group = cells[key]
        losses = np.array([r.avg_loss for r in group])
        out.append(
            {
                "method": key[0],
                "k": key[1],
                "d": key[2],
                "r": key[3],
                "noise_model": key[4],
                "sigma": key[5],
                "n": len(group),
                "mean_avg_loss": float(np.mean(losses)),
                "median_avg_loss": float(np.median(losses)),
                "q05_avg_loss": float(np.quantile(losses, 0.05)),
                "q95_avg_loss": float(np.quantile(losses, 0.95)),
                "mean_runtime_ms": float(np.mean([r.runtime_ms for r in group])),
            }
        )
    return {"cells": out}


def parse_config_file(
    path: str | Path,
    overrides: dict | None = None,
    defaults: dict | None = None,
) -> list[ExperimentConfig]:
    """Read scenario sections from a key = value config file.

    Every section defines one sweep. ``defaults`` fills keys a section
    leaves unset (below the file's own DEFAULT section), while entries in
    ``overrides`` (from CLI flags) win over everything.
    """
    import configparser

    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    if not parser.sections():
        raise ConfigError(f"{path}: no scenario sections found")
    configs = []
    overrides = overrides or {}
    defaults = defaults or {}
    for section in parser.sections():
        raw = dict(defaults)
        raw.update(parser[section])
        raw.update({k: v for k, v in overrides.items() if v is not None})
        try:
            configs.append(_config_from_mapping(raw, name=section))
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"{path} [{section}]: {exc}") from exc
    return configs


def _config_from_mapping(raw: dict, name: str) -> ExperimentConfig:
    def split(value):
        if isinstance(value, str):
            return [v.strip() for v in value.replace(",", " ").split()]
        return list(value)

    try:
        k = int(raw["k"])
        d = int(raw["d"])
        r = int(raw["r"])
    except KeyError as exc:
        raise ConfigError(f"missing required key {exc.args[0]!r}")
    sigmas = tuple(float(s) for s in split(raw.get("sigmas", "0")))
    methods = tuple(split(raw.get("methods", "tmhosvd")))
    pursuit = PursuitOptions(
        tol=float(raw.get("pursuit_tol", 1e-10)),
        max_iters=int(raw.get("pursuit_max_iters", 500)),
    )
    tpm = TpmOptions(
        restarts=int(raw.get("tpm_restarts", 10)),
        iters=int(raw.get("tpm_iters", 100)),
        tol=float(raw.get("tpm_tol", 1e-10)),
    )
    if any(not math.isfinite(s) for s in sigmas):
        raise ConfigError("sigma values must be finite")
    return ExperimentConfig(
        k=k,
        d=d,
        r=r,
        noise_model=raw.get("noise_model", "gaussian"),
        sigmas=sigmas,
        factor_mode=raw.get("factor_mode", "canonical"),
        trials=int(raw.get("trials", 50)),
        base_seed=int(raw.get("base_seed", 0)),
        methods=methods,
        pursuit=pursuit,
        tpm=tpm,
        csv_path=raw.get("csv_path"),
        threads=int(raw.get("threads", 1)),
        name=name,
    )
