"""The benchmark CSV schema this package consumes.

The column list mirrors the producer's result-row format exactly; parsing
is strict so that schema drift surfaces as an error naming the offending
line rather than as a silently wrong figure.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

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


class SchemaError(ValueError):
    """The CSV does not match the benchmark result schema."""


@dataclass(frozen=True)
class BenchRow:
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

    def scenario(self) -> tuple:
        return (self.k, self.d, self.r, self.noise_model)


def load_rows(path: str | Path) -> list[BenchRow]:
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file")
        if tuple(header) != CSV_FIELDS:
            raise SchemaError(
                f"{path}: header {header} does not match the expected "
                f"benchmark schema {list(CSV_FIELDS)}"
            )
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != len(CSV_FIELDS):
                raise SchemaError(
                    f"{path}:{lineno}: expected {len(CSV_FIELDS)} fields, "
                    f"got {len(rec)}"
                )
            try:
                rows.append(
                    BenchRow(
                        method=rec[0],
                        k=int(rec[1]),
                        d=int(rec[2]),
                        r=int(rec[3]),
                        noise_model=rec[4],
                        sigma=float(rec[5]),
                        trial=int(rec[6]),
                        seed=int(rec[7]),
                        avg_loss=float(rec[8]),
                        max_loss=float(rec[9]),
                        avg_lambda_loss=float(rec[10]),
                        residual_frob=float(rec[11]),
                        rank_hat=int(rec[12]) if rec[12] else None,
                        runtime_ms=float(rec[13]),
                        converged_count=int(rec[14]),
                    )
                )
            except ValueError as exc:
                raise SchemaError(f"{path}:{lineno}: {exc}") from exc
    return rows
