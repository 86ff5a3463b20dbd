"""Figure rendering for run and sweep reports.

Figures are written next to the CSV output. The Agg backend is forced so
rendering works headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .harness import RunMetrics, SweepPoint


def render_run_figure(metrics: RunMetrics, path: str | Path, title: str = "") -> Path:
    """Per-processor completion counts plus the hit/miss split."""
    path = Path(path)
    fig, (ax_load, ax_cache) = plt.subplots(1, 2, figsize=(9, 3.5))

    procs = range(len(metrics.per_processor_completed))
    ax_load.bar(procs, metrics.per_processor_completed, color="#4878a8")
    ax_load.set_xlabel("processor")
    ax_load.set_ylabel("completed queries")
    ax_load.set_title("load balance")
    ax_load.set_xticks(list(procs))

    ax_cache.bar([0, 1], [metrics.hit_total, metrics.miss_total], color=["#55a868", "#c44e52"])
    ax_cache.set_xticks([0, 1])
    ax_cache.set_xticklabels(["hits", "misses"])
    ax_cache.set_title(f"cache (hit rate {metrics.hit_rate:.1%})")

    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_sweep_figure(points: list[SweepPoint], path: str | Path, title: str = "") -> Path:
    """Throughput and hit rate against the swept parameter."""
    path = Path(path)
    xs = [p.value for p in points]
    throughput = [p.metrics.throughput_qps for p in points]
    hit_rate = [p.metrics.hit_rate for p in points]

    fig, (ax_tp, ax_hr) = plt.subplots(1, 2, figsize=(9, 3.5))
    parameter = points[0].parameter if points else "value"

    ax_tp.plot(xs, throughput, marker="o", color="#4878a8")
    ax_tp.set_xlabel(parameter)
    ax_tp.set_ylabel("throughput (queries/s, simulated)")
    ax_tp.set_title("throughput")
    if max(xs) / max(min(xs), 1e-12) > 100:
        ax_tp.set_xscale("log")

    ax_hr.plot(xs, hit_rate, marker="s", color="#55a868")
    ax_hr.set_xlabel(parameter)
    ax_hr.set_ylabel("cache hit rate")
    ax_hr.set_ylim(0, 1)
    ax_hr.set_title("cache hit rate")
    if max(xs) / max(min(xs), 1e-12) > 100:
        ax_hr.set_xscale("log")

    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
