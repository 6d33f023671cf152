"""Figures for evaluation reports, written next to the CSV outputs."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .evaluation import METRICS  # noqa: E402

LABELS = {"ndcg": "nDCG", "map": "MAP", "recall": "Recall", "precision": "Precision"}

plt.rcParams.update({
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
})


def plot_pr_curves(reports, path, title=None):
    """Precision against recall for k = 1..20, one line per algorithm."""
    fig, ax = plt.subplots(figsize=(4.5, 3.5))
    for rep in reports:
        ks, p, r = zip(*rep.pr_curve)
        ax.plot(r, p, marker="o", markersize=3, linewidth=1, label=rep.algorithm)
    ax.set_xlabel("Recall")
    ax.set_ylabel("Precision")
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_metric_bars(reports, path):
    fig, ax = plt.subplots(figsize=(6, 3.2))
    width = 0.8 / max(len(reports), 1)
    x = np.arange(len(METRICS))
    for i, rep in enumerate(reports):
        ax.bar(x + i * width, [rep.value(m) for m in METRICS], width, label=rep.algorithm)
    k = reports[0].k if reports else 20
    ax.set_xticks(x + width * (len(reports) - 1) / 2)
    ax.set_xticklabels([f"{LABELS[m]}@{k}" for m in METRICS])
    ax.legend(frameon=False, ncol=3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
