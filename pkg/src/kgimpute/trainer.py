"""Full-batch training of the GCN against pre-trained target vectors.

The objective is mean squared error between final-layer node outputs
and the dictionary vectors of supervised nodes. Supervised nodes are
split into train/validation by a seeded shuffle; the returned model is
the checkpoint with the best validation loss. Everything is a pure
function of the graph, the config and the seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import TrainingDiverged
from .gcn import ForwardTrace, GcnModel, backward, forward, init_model
from .graphbuild import KnowledgeGraph

OPTIMIZERS = ("sgd", "adam")


@dataclass
class TrainConfig:
    epochs: int = 200
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    seed: int = 42
    val_fraction: float = 0.1
    patience: int = 20
    layers: int = 3
    hidden_dims: tuple[int, ...] | None = None

    def validate(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"optimizer must be one of {OPTIMIZERS}")
        if not (0.0 <= self.val_fraction < 1.0):
            raise ValueError("val_fraction must be in [0, 1)")
        if self.layers < 1:
            raise ValueError("layers must be >= 1")
        if self.hidden_dims is not None and len(self.hidden_dims) != self.layers - 1:
            raise ValueError("hidden_dims must list one size per inner layer")


@dataclass
class EpochStats:
    epoch: int
    train_mse: float
    val_mse: float | None


@dataclass
class TrainReport:
    epochs: list[EpochStats]
    best_epoch: int
    best_val_mse: float | None
    provenance: dict = field(default_factory=dict)


def mse_loss(trace: ForwardTrace, g: KnowledgeGraph, node_subset):
    """Mean squared error over a subset of supervised nodes.

    Returns the scalar loss and the per-node gradient of the loss with
    respect to the final-layer outputs (zero outside the subset), ready
    to feed to `backward`.
    """
    idx = np.asarray(node_subset, dtype=np.int64)
    if idx.size == 0:
        raise ValueError("node subset is empty")
    if not np.all(g.supervised[idx]):
        raise ValueError("node subset contains unsupervised nodes")
    out = trace.output
    denom = idx.size * out.shape[1]
    diff = out[idx] - g.targets[idx]
    loss = float((diff * diff).sum() / denom)
    grad_out = np.zeros_like(out)
    grad_out[idx] = (2.0 / denom) * diff
    return loss, grad_out


class _Adam:
    def __init__(self, model: GcnModel, cfg: TrainConfig):
        self.lr = cfg.learning_rate
        self.b1, self.b2, self.eps = cfg.beta1, cfg.beta2, cfg.epsilon
        self.t = 0
        self.m = [np.zeros_like(p) for p in model.weights + model.biases]
        self.v = [np.zeros_like(p) for p in model.weights + model.biases]

    def step(self, model: GcnModel, grads_w, grads_b) -> None:
        self.t += 1
        bc1 = 1.0 - self.b1 ** self.t
        bc2 = 1.0 - self.b2 ** self.t
        params = model.weights + model.biases
        grads = grads_w + grads_b
        for i, (p, grad) in enumerate(zip(params, grads)):
            self.m[i] = self.b1 * self.m[i] + (1.0 - self.b1) * grad
            self.v[i] = self.b2 * self.v[i] + (1.0 - self.b2) * (grad * grad)
            m_hat = self.m[i] / bc1
            v_hat = self.v[i] / bc2
            p -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


class _Sgd:
    def __init__(self, model: GcnModel, cfg: TrainConfig):
        self.lr = cfg.learning_rate

    def step(self, model: GcnModel, grads_w, grads_b) -> None:
        for p, grad in zip(model.weights + model.biases, grads_w + grads_b):
            p -= self.lr * grad


def split_supervised(g: KnowledgeGraph, cfg: TrainConfig):
    """Seeded train/validation split of supervised node indices.

    Also returns the generator so model initialization continues the
    same stream. At least one node always stays in the train set.
    """
    supervised = np.flatnonzero(g.supervised)
    if supervised.size < 2:
        raise ValueError("training needs at least 2 supervised nodes")
    rng = np.random.default_rng(cfg.seed)
    perm = rng.permutation(supervised)
    n_val = min(int(supervised.size * cfg.val_fraction), supervised.size - 1)
    val_idx = np.sort(perm[:n_val])
    train_idx = np.sort(perm[n_val:])
    return train_idx, val_idx, rng


def train(g: KnowledgeGraph, cfg: TrainConfig | None = None):
    """Train a fresh model on the graph; returns (model, report).

    The model returned is the best-validation checkpoint, or the final
    state when there is no validation set. Early stopping kicks in
    after `patience` epochs without validation improvement.
    """
    cfg = cfg or TrainConfig()
    cfg.validate()
    train_idx, val_idx, rng = split_supervised(g, cfg)
    hidden = list(cfg.hidden_dims) if cfg.hidden_dims else [g.dim] * (cfg.layers - 1)
    dims = [g.dim] + hidden + [g.dim]
    model = init_model(dims, rng=rng, seed=cfg.seed)
    optimizer = (_Adam if cfg.optimizer == "adam" else _Sgd)(model, cfg)

    has_val = val_idx.size > 0
    best_model = model.copy()
    best_epoch = 0
    best_val = math.inf
    epochs_since_best = 0
    stopped_early = False
    stats: list[EpochStats] = []

    for epoch in range(1, cfg.epochs + 1):
        trace = forward(g, model)
        train_mse, grad_out = mse_loss(trace, g, train_idx)
        if not math.isfinite(train_mse):
            raise TrainingDiverged(f"non-finite training loss at epoch {epoch}")
        val_mse = mse_loss(trace, g, val_idx)[0] if has_val else None
        stats.append(EpochStats(epoch=epoch, train_mse=train_mse, val_mse=val_mse))
        if has_val:
            if val_mse < best_val:
                best_val = val_mse
                best_model = model.copy()
                best_epoch = epoch
                epochs_since_best = 0
            else:
                epochs_since_best += 1
                if cfg.patience > 0 and epochs_since_best >= cfg.patience:
                    stopped_early = True
                    break
        grads_w, grads_b = backward(g, model, trace, grad_out)
        optimizer.step(model, grads_w, grads_b)

    if not has_val:
        best_model = model.copy()
        best_epoch = stats[-1].epoch
        best_val = None

    report = TrainReport(
        epochs=stats,
        best_epoch=best_epoch,
        best_val_mse=best_val if has_val else None,
        provenance={
            "seed": cfg.seed,
            "dims": dims,
            "optimizer": cfg.optimizer,
            "learning_rate": cfg.learning_rate,
            "n_train": int(train_idx.size),
            "n_val": int(val_idx.size),
            "epochs_run": len(stats),
            "stopped_early": stopped_early,
        })
    return best_model, report


def write_report_jsonl(report: TrainReport, path) -> None:
    """One JSON line per epoch, then one tagged summary line."""
    with open(path, "w", encoding="utf-8") as fh:
        for s in report.epochs:
            fh.write(json.dumps(
                {"epoch": s.epoch, "train_mse": s.train_mse, "val_mse": s.val_mse},
                sort_keys=True) + "\n")
        fh.write(json.dumps(
            {"summary": {
                "best_epoch": report.best_epoch,
                "best_val_mse": report.best_val_mse,
                **report.provenance,
            }}, sort_keys=True) + "\n")


def read_report_jsonl(path) -> TrainReport:
    epochs = []
    best_epoch = 0
    best_val = None
    provenance: dict = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            row = json.loads(line)
            if "summary" in row:
                summary = dict(row["summary"])
                best_epoch = summary.pop("best_epoch")
                best_val = summary.pop("best_val_mse")
                provenance = summary
            else:
                epochs.append(EpochStats(
                    epoch=row["epoch"], train_mse=row["train_mse"],
                    val_mse=row["val_mse"]))
    return TrainReport(epochs=epochs, best_epoch=best_epoch,
                       best_val_mse=best_val, provenance=provenance)
