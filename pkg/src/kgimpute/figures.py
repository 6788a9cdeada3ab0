"""Figure rendering for the CLI report paths.

Each report-producing stage drops a PNG next to its machine-readable
output: training curves beside the epoch log, gold-vs-model scatter
panels beside the evaluation results, and a vector-norm histogram
beside the imputation report.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

import numpy as np  # noqa: E402

_PNG_META = {"Software": "kgimpute"}


def render_train_curves(report, path) -> None:
    """Train/validation MSE per epoch, best epoch marked."""
    epochs = [s.epoch for s in report.epochs]
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.plot(epochs, [s.train_mse for s in report.epochs], label="train MSE")
    if any(s.val_mse is not None for s in report.epochs):
        ax.plot(epochs, [s.val_mse for s in report.epochs], label="validation MSE")
        ax.axvline(report.best_epoch, color="gray", linestyle="--", linewidth=1,
                   label=f"best epoch ({report.best_epoch})")
    ax.set_xlabel("epoch")
    ax.set_ylabel("MSE")
    ax.set_yscale("log")
    ax.legend()
    ax.set_title("Training progress")
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_PNG_META)
    plt.close(fig)


def render_eval_panels(panels, path) -> None:
    """One scatter of gold vs model similarity per dataset.

    `panels` is a list of (name, gold_scores, model_scores, result_dict)
    tuples; correlations are annotated scaled by 100, the usual way
    these benchmarks are quoted.
    """
    n = max(len(panels), 1)
    ncols = min(3, n)
    nrows = math.ceil(n / ncols)
    fig, axes = plt.subplots(nrows, ncols, figsize=(4.2 * ncols, 3.6 * nrows),
                             squeeze=False)
    for i, (name, gold, scores, result) in enumerate(panels):
        ax = axes[i // ncols][i % ncols]
        ax.scatter(gold, scores, s=12, alpha=0.7)
        ax.set_xlabel("gold score")
        ax.set_ylabel("inner product")
        ax.set_title(
            f"{name}\nr={100 * result['pearson']:.1f} "
            f"rho={100 * result['spearman']:.1f} "
            f"missed pairs={result['missed_pairs_pct']:.1f}%",
            fontsize=9)
    for j in range(len(panels), nrows * ncols):
        axes[j // ncols][j % ncols].axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_PNG_META)
    plt.close(fig)


def render_norm_histogram(result, path) -> None:
    """Distribution of vector norms, split by provenance."""
    groups: dict[str, list[float]] = {}
    for word, vec in result.vectors.items():
        groups.setdefault(result.provenance[word], []).append(
            float(np.linalg.norm(vec)))
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for label in sorted(groups):
        ax.hist(groups[label], bins=30, alpha=0.6, label=f"{label} (n={len(groups[label])})")
    ax.set_xlabel("vector norm")
    ax.set_ylabel("count")
    ax.legend()
    ax.set_title("Embedding norms by provenance")
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_PNG_META)
    plt.close(fig)
