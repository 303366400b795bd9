"""Quantum-cost charts for benchmark tables."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["plot_bench", "plot_stage_costs"]


def _label(row) -> str:
    return row.function if not row.source else f"{row.function}\n({row.source})"


def plot_bench(rows, path, title: str = "Quantum cost per function") -> Path:
    """Grouped bars: our QC next to the reference QC (when known).

    Unverified rows get a hatched bar so a bad result cannot pass unnoticed.
    """
    path = Path(path)
    fig, ax = plt.subplots(figsize=(max(4.0, 1.2 * len(rows) + 2), 3.6))
    x = np.arange(len(rows))
    width = 0.38
    ours = [r.qc_ours or 0 for r in rows]
    refs = [r.qc_reference if r.qc_reference is not None else 0 for r in rows]
    bars = ax.bar(x - width / 2, ours, width, label="synthesized", color="#4477aa")
    for bar, r in zip(bars, rows):
        if not r.verified:
            bar.set_hatch("//")
            bar.set_facecolor("#cc6677")
    ax.bar(x + width / 2, refs, width, label="reference", color="#bbbbbb")
    for xi, r in zip(x, rows):
        if r.qc_ours is not None:
            ax.text(xi - width / 2, r.qc_ours, str(r.qc_ours), ha="center", va="bottom", fontsize=8)
    ax.set_xticks(x)
    ax.set_xticklabels([_label(r) for r in rows], fontsize=8)
    ax.set_ylabel("QC (NCV gates)")
    ax.set_title(title)
    ax.legend(frameon=False, fontsize=8)
    ax.spines[["top", "right"]].set_visible(False)
    fig.tight_layout()
    # fixed metadata keeps the PNG bytes identical across runs
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_stage_costs(per_stage: dict[str, int], path, title: str = "Gate count by stage") -> Path:
    path = Path(path)
    names = list(per_stage)
    fig, ax = plt.subplots(figsize=(4.8, 3.0))
    ax.plot(names, [per_stage[n] for n in names], marker="o", color="#4477aa")
    for n in names:
        ax.annotate(str(per_stage[n]), (n, per_stage[n]), textcoords="offset points",
                    xytext=(0, 5), ha="center", fontsize=8)
    ax.set_ylabel("gates")
    ax.set_title(title)
    ax.spines[["top", "right"]].set_visible(False)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path
