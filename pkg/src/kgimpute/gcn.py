"""Graph convolutional network with hand-derived gradients.

Each layer aggregates over the closed neighborhood S(v) = N(v) + {v}
with the self node weighted 1, normalizes by C = 1 + sum of incident
edge weights, then applies an affine transform. ReLU follows every
layer except the last, whose output stays linear. The aggregation
coefficients of each node form a convex combination, so constant input
is a fixed point of the aggregation step.

Everything runs in 64-bit floats. The sparse path iterates adjacency
entries; `forward_dense_oracle` recomputes the same function through an
explicitly materialized dense matrix and exists purely to cross-check.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import FormatError
from .graphbuild import KnowledgeGraph

MODEL_MAGIC = "kgimpute-model"
MODEL_VERSION = 1


@dataclass(eq=False)
class GcnModel:
    """Per-layer weight matrices W (d_out, d_in) and bias vectors b (d_out,)."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    seed: int | None = None

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    @property
    def dims(self) -> list[int]:
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    def validate(self) -> None:
        if self.n_layers < 1:
            raise ValueError("model needs at least one layer")
        if len(self.biases) != self.n_layers:
            raise ValueError("weights/biases length mismatch")
        prev = self.weights[0].shape[1]
        for t, (w, b) in enumerate(zip(self.weights, self.biases), start=1):
            if w.ndim != 2 or b.ndim != 1:
                raise ValueError(f"layer {t}: wrong parameter rank")
            if w.shape[1] != prev:
                raise ValueError(
                    f"layer {t}: input dim {w.shape[1]} does not chain from {prev}")
            if b.shape[0] != w.shape[0]:
                raise ValueError(f"layer {t}: bias dim {b.shape[0]} != {w.shape[0]}")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValueError(f"layer {t}: non-finite parameter")
            prev = w.shape[0]

    def copy(self) -> "GcnModel":
        return GcnModel(
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            seed=self.seed)

    def equals(self, other: "GcnModel") -> bool:
        return (
            self.n_layers == other.n_layers
            and self.seed == other.seed
            and all(np.array_equal(a, b) for a, b in zip(self.weights, other.weights))
            and all(np.array_equal(a, b) for a, b in zip(self.biases, other.biases)))


def init_model(dims, rng=None, seed: int | None = None) -> GcnModel:
    """Uniform(-a, a) weights with a = sqrt(6 / (d_in + d_out)), zero biases."""
    if rng is None:
        rng = np.random.default_rng(seed)
    weights, biases = [], []
    for d_in, d_out in zip(dims[:-1], dims[1:]):
        bound = math.sqrt(6.0 / (d_in + d_out))
        weights.append(rng.uniform(-bound, bound, size=(d_out, d_in)))
        biases.append(np.zeros(d_out, dtype=np.float64))
    model = GcnModel(weights=weights, biases=biases, seed=seed)
    model.validate()
    return model


def aggregate(g: KnowledgeGraph, h_prev: np.ndarray, v: int) -> np.ndarray:
    """Normalized weighted sum over S(v) for a single node.

    The self term enters with weight 1; an isolated node just returns
    its own vector.
    """
    acc = np.array(h_prev[v], dtype=np.float64)
    lo, hi = int(g.indptr[v]), int(g.indptr[v + 1])
    for pos in range(lo, hi):
        acc += g.weights[pos] * h_prev[g.indices[pos]]
    return acc / g.norm_constants()[v]


def aggregate_all(g: KnowledgeGraph, h: np.ndarray) -> np.ndarray:
    """Aggregation of every node at once; matches `aggregate` bit for bit.

    Contributions accumulate in CSR order, the same order the per-node
    loop uses, so the two paths agree exactly.
    """
    agg = h.copy()
    if len(g.indices):
        np.add.at(agg, g.edge_src, g.weights[:, None] * h[g.indices])
    agg /= g.norm_constants()[:, None]
    return agg


def aggregate_all_transpose(g: KnowledgeGraph, d: np.ndarray) -> np.ndarray:
    """Apply the transpose of the aggregation operator (for backprop)."""
    norm = g.norm_constants()
    out = d / norm[:, None]
    if len(g.indices):
        scaled = (g.weights / norm[g.edge_src])[:, None] * d[g.edge_src]
        np.add.at(out, g.indices, scaled)
    return out


@dataclass
class ForwardTrace:
    """All intermediates of one forward pass.

    activations[t] holds h^t for t = 0..T (h^0 is the feature matrix);
    preactivations[t-1] holds the affine output z^t before the ReLU.
    The final activation equals the final preactivation: no ReLU there.
    """

    activations: list[np.ndarray]
    preactivations: list[np.ndarray]

    @property
    def output(self) -> np.ndarray:
        return self.activations[-1]


def forward(g: KnowledgeGraph, model: GcnModel) -> ForwardTrace:
    """Run all layers over the graph, keeping intermediates for backprop."""
    model.validate()
    if model.dims[0] != g.dim:
        raise ValueError(
            f"model input dim {model.dims[0]} != graph feature dim {g.dim}")
    activations = [g.features.astype(np.float64, copy=True)]
    preactivations = []
    last = model.n_layers
    for t, (w, b) in enumerate(zip(model.weights, model.biases), start=1):
        agg = aggregate_all(g, activations[-1])
        z = agg @ w.T + b
        preactivations.append(z)
        activations.append(np.maximum(z, 0.0) if t < last else z)
    return ForwardTrace(activations=activations, preactivations=preactivations)


def backward(
    g: KnowledgeGraph,
    model: GcnModel,
    trace: ForwardTrace,
    grad_out: np.ndarray,
    with_feature_grads: bool = False,
):
    """Exact gradients of any loss whose per-node output gradient is grad_out.

    Returns (grad_W, grad_b) as per-layer lists; with with_feature_grads
    also returns the gradient with respect to the input features. The
    ReLU subgradient at exactly zero is taken as zero.
    """
    n_layers = model.n_layers
    grad_out = np.asarray(grad_out, dtype=np.float64)
    if grad_out.shape != trace.output.shape:
        raise ValueError(
            f"grad_out shape {grad_out.shape} != output shape {trace.output.shape}")
    grads_w: list[np.ndarray] = [np.empty(0)] * n_layers
    grads_b: list[np.ndarray] = [np.empty(0)] * n_layers
    d_h = grad_out
    for t in range(n_layers, 0, -1):
        z = trace.preactivations[t - 1]
        d_z = d_h * (z > 0.0) if t < n_layers else d_h
        agg = aggregate_all(g, trace.activations[t - 1])
        grads_w[t - 1] = d_z.T @ agg
        grads_b[t - 1] = d_z.sum(axis=0)
        d_h = aggregate_all_transpose(g, d_z @ model.weights[t - 1])
    if with_feature_grads:
        return grads_w, grads_b, d_h
    return grads_w, grads_b


def forward_dense_oracle(g: KnowledgeGraph, model: GcnModel) -> np.ndarray:
    """Reference forward pass through a dense normalized adjacency matrix.

    Test-scale only; output must match `forward` to tight absolute
    tolerance on any graph.
    """
    n = g.n_nodes
    dense = np.zeros((n, n), dtype=np.float64)
    for v in range(n):
        for u, s in g.neighbors(v):
            dense[v, u] = s
        dense[v, v] = 1.0
    dense /= dense.sum(axis=1)[:, None]
    h = g.features.astype(np.float64, copy=True)
    last = model.n_layers
    for t, (w, b) in enumerate(zip(model.weights, model.biases), start=1):
        z = (dense @ h) @ w.T + b
        h = np.maximum(z, 0.0) if t < last else z
    return h


def save_model(model: GcnModel, path) -> None:
    model.validate()
    payload = {
        "magic": MODEL_MAGIC,
        "version": MODEL_VERSION,
        "n_layers": model.n_layers,
        "dims": model.dims,
        "weights": [w.tolist() for w in model.weights],
        "biases": [b.tolist() for b in model.biases],
        "seed": model.seed,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True)


def load_model(path) -> GcnModel:
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise FormatError(f"{path}: not a readable model file: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("magic") != MODEL_MAGIC:
        raise FormatError(f"{path}: missing model magic tag")
    if payload.get("version") != MODEL_VERSION:
        raise FormatError(f"{path}: unsupported model version {payload.get('version')!r}")
    model = GcnModel(
        weights=[np.array(w, dtype=np.float64) for w in payload["weights"]],
        biases=[np.array(b, dtype=np.float64) for b in payload["biases"]],
        seed=payload.get("seed"))
    model.validate()
    return model
