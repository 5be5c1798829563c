"""Figure rendering from benchmark rows.

Two figure kinds: loss-vs-noise curves (mean average loss per method with
a 5/95 quantile band) and histograms of log10 average loss per method at
one noise level. Losses cluster in well/poorly converged modes at high
noise, so histograms default to the log axis with 30 bins. Output is
vector graphics (SVG); re-rendering overwrites the same paths.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .schema import BenchRow, load_rows

HIST_BINS = 30
METHOD_STYLE = {
    "tmhosvd": {"color": "#1f77b4", "marker": "o"},
    "tpm": {"color": "#d62728", "marker": "s"},
}
FALLBACK_COLORS = ("#2ca02c", "#9467bd", "#8c564b")


@dataclass(frozen=True)
class PlotJob:
    csv_path: str
    output_dir: str
    kind: str = "curves"
    k: int | None = None
    d: int | None = None
    r: int | None = None
    noise_model: str | None = None
    sigma: float | None = None
    log_scale: bool = True

    def __post_init__(self):
        if self.kind not in ("curves", "hist"):
            raise ValueError(f"unknown figure kind {self.kind!r}")


def filter_rows(rows: list[BenchRow], job: PlotJob) -> list[BenchRow]:
    out = []
    for row in rows:
        if job.k is not None and row.k != job.k:
            continue
        if job.d is not None and row.d != job.d:
            continue
        if job.r is not None and row.r != job.r:
            continue
        if job.noise_model is not None and row.noise_model != job.noise_model:
            continue
        if job.sigma is not None and row.sigma != job.sigma:
            continue
        out.append(row)
    return out


def curve_data(rows: list[BenchRow]) -> dict:
    """Per-method curves: sigma grid, mean avg_loss, and 5/95 quantiles.

    The means here are definitionally the same cell means the producer's
    summary reports; tests pin that equality.
    """
    methods: dict[str, dict[float, list[float]]] = {}
    for row in rows:
        methods.setdefault(row.method, {}).setdefault(row.sigma, []).append(
            row.avg_loss
        )
    out = {}
    for method, cells in sorted(methods.items()):
        sigmas = np.array(sorted(cells))
        mean = np.array([np.mean(cells[s]) for s in sigmas])
        q05 = np.array([np.quantile(cells[s], 0.05) for s in sigmas])
        q95 = np.array([np.quantile(cells[s], 0.95) for s in sigmas])
        out[method] = {"sigmas": sigmas, "mean": mean, "q05": q05, "q95": q95}
    return out


def _style(method: str, i: int) -> dict:
    if method in METHOD_STYLE:
        return METHOD_STYLE[method]
    return {"color": FALLBACK_COLORS[i % len(FALLBACK_COLORS)], "marker": "^"}


def render(job: PlotJob) -> list[Path]:
    """Render the requested figures; returns the written file paths."""
    rows = load_rows(job.csv_path)
    rows = filter_rows(rows, job)
    if not rows:
        raise ValueError("no rows left after applying the scenario filters")
    outdir = Path(job.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    if job.kind == "curves":
        return _render_curves(rows, job, outdir)
    return _render_hist(rows, job, outdir)


def _scenario_groups(rows: list[BenchRow]) -> dict[tuple, list[BenchRow]]:
    groups: dict[tuple, list[BenchRow]] = {}
    for row in rows:
        groups.setdefault(row.scenario(), []).append(row)
    return groups


def _render_curves(rows, job, outdir) -> list[Path]:
    written = []
    for (k, d, r, model), group in sorted(_scenario_groups(rows).items()):
        curves = curve_data(group)
        fig, ax = plt.subplots(figsize=(5.2, 3.6))
        for i, (method, c) in enumerate(curves.items()):
            style = _style(method, i)
            ax.plot(
                c["sigmas"],
                c["mean"],
                label=method,
                color=style["color"],
                marker=style["marker"],
                markersize=4,
            )
            ax.fill_between(
                c["sigmas"], c["q05"], c["q95"], color=style["color"], alpha=0.15
            )
        if job.log_scale:
            ax.set_yscale("log")
        ax.set_xlabel(r"noise level $\sigma$")
        ax.set_ylabel("average loss")
        ax.set_title(f"k={k}, d={d}, r={r}, {model} noise")
        ax.legend(frameon=False)
        fig.tight_layout()
        path = outdir / f"loss_curves_k{k}_d{d}_r{r}_{model}.svg"
        fig.savefig(path)
        plt.close(fig)
        written.append(path)
    return written


def _render_hist(rows, job, outdir) -> list[Path]:
    sigmas = sorted({row.sigma for row in rows})
    if job.sigma is None and len(sigmas) > 1:
        raise ValueError(
            f"histograms need a single noise level; found {sigmas}, "
            "pass --sigma to pick one"
        )
    sigma = job.sigma if job.sigma is not None else sigmas[0]
    groups = _scenario_groups(rows)
    ranks = sorted({key[2] for key in groups})
    k_vals = sorted({key[0] for key in groups})
    d_vals = sorted({key[1] for key in groups})
    models = sorted({key[3] for key in groups})
    fig, axes = plt.subplots(
        1, len(ranks), figsize=(3.6 * len(ranks), 3.2), squeeze=False
    )
    for ax, r in zip(axes[0], ranks):
        panel = [
            row
            for key, group in groups.items()
            if key[2] == r
            for row in group
        ]
        by_method: dict[str, list[float]] = {}
        for row in panel:
            if row.avg_loss > 0 and np.isfinite(row.avg_loss):
                by_method.setdefault(row.method, []).append(np.log10(row.avg_loss))
        for i, (method, vals) in enumerate(sorted(by_method.items())):
            style = _style(method, i)
            ax.hist(
                vals,
                bins=HIST_BINS,
                color=style["color"],
                alpha=0.55,
                label=method,
            )
        ax.set_xlabel(r"$\log_{10}$ average loss")
        ax.set_title(f"r={r}")
        ax.legend(frameon=False, fontsize=8)
    axes[0][0].set_ylabel("trials")
    fig.suptitle(
        f"k={'/'.join(map(str, k_vals))}, d={'/'.join(map(str, d_vals))}, "
        f"{'/'.join(models)} noise, sigma={sigma:g}"
    )
    fig.tight_layout()
    path = outdir / f"loss_hist_sigma{sigma:g}.svg"
    fig.savefig(path)
    plt.close(fig)
    return [path]
