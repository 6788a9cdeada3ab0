"""Shared test utilities: random graph generation and independent oracles.

The oracles here (brute-force edge scan, central finite differences)
deliberately avoid the code paths they check.
"""

from __future__ import annotations

import numpy as np

from kgimpute.embeddings import EmbeddingTable
from kgimpute.gcn import forward, init_model
from kgimpute.graphbuild import OOV, PRETRAINED, KnowledgeGraph
from kgimpute.trainer import mse_loss


def make_table(entries: dict) -> EmbeddingTable:
    arrays = {w: np.asarray(v, dtype=np.float64) for w, v in entries.items()}
    dim = len(next(iter(arrays.values())))
    return EmbeddingTable(dim=dim, entries=arrays)


def make_random_graph(rng, n_nodes, dim, edge_prob=0.3, sup_fraction=0.6,
                      eta=0.5, feature_scale=1.0):
    """Random symmetric graph with weights in (eta, 1] and random targets."""
    words = [f"n{i}" for i in range(n_nodes)]
    n_sup = max(1, int(round(sup_fraction * n_nodes)))
    kinds = [PRETRAINED] * n_sup + [OOV] * (n_nodes - n_sup)
    features = feature_scale * rng.normal(size=(n_nodes, dim))
    targets = {v: rng.normal(size=dim) for v in range(n_sup)}
    iu, ju = np.triu_indices(n_nodes, k=1)
    mask = rng.random(iu.size) < edge_prob
    low = np.nextafter(eta, 1.0)
    weights = rng.uniform(low, 1.0, size=int(mask.sum()))
    edges = [(int(i), int(j), float(w))
             for i, j, w in zip(iu[mask], ju[mask], weights)]
    return KnowledgeGraph.from_edges(words, kinds, features, targets, edges, eta)


def brute_force_edges(token_sets, eta):
    """O(n^2) all-pairs Jaccard scan, the oracle for the inverted index."""
    edges = []
    n = len(token_sets)
    for i in range(n):
        for j in range(i + 1, n):
            a, b = set(token_sets[i]), set(token_sets[j])
            inter = len(a & b)
            union = len(a | b)
            if union == 0:
                continue
            weight = inter / union
            if weight > eta:
                edges.append((i, j, weight))
    return edges


def finite_diff_param_grads(g, model, subset, step=1e-5):
    """Central finite differences of the MSE loss for every W and b entry."""

    def loss_now():
        return mse_loss(forward(g, model), g, subset)[0]

    fd_w, fd_b = [], []
    for layer in range(model.n_layers):
        for params, sink in ((model.weights[layer], fd_w),
                             (model.biases[layer], fd_b)):
            grad = np.zeros_like(params)
            it = np.nditer(params, flags=["multi_index"])
            for _ in it:
                ix = it.multi_index
                orig = params[ix]
                params[ix] = orig + step
                plus = loss_now()
                params[ix] = orig - step
                minus = loss_now()
                params[ix] = orig
                grad[ix] = (plus - minus) / (2.0 * step)
            sink.append(grad)
    return fd_w, fd_b


def max_relative_error(analytic, numeric, floor=1e-4):
    """Worst |a - f| / max(|a|, |f|, floor) over all coordinates.

    The floor keeps near-zero coordinates, where finite differences only
    resolve absolute error, from dominating; their agreement is still
    required at floor-scaled absolute precision.
    """
    worst = 0.0
    for a, f in zip(analytic, numeric):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(f)), floor)
        worst = max(worst, float(np.max(np.abs(a - f) / denom)))
    return worst


def sample_gradient_check_case(rng, n_range=(3, 30), dims=(2, 5),
                               layer_choices=(1, 2, 3), kink_tol=1e-6,
                               max_attempts=200):
    """Random (graph, model, subset) with all preactivations off the kink."""
    for _ in range(max_attempts):
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        dim = int(rng.choice(dims))
        t = int(rng.choice(layer_choices))
        g = make_random_graph(rng, n, dim, edge_prob=float(rng.uniform(0.1, 0.5)))
        model = init_model([dim] * (t + 1), rng=rng)
        trace = forward(g, model)
        if all(np.min(np.abs(z)) >= kink_tol for z in trace.preactivations):
            subset = np.flatnonzero(g.supervised)
            return g, model, subset
    raise AssertionError("could not sample a kink-free gradient check case")
