"""Knowledge-graph construction from grounding token sets.

Nodes are the selected in-dictionary vocabulary plus requested
out-of-vocabulary words. An undirected edge joins two nodes when the
Jaccard overlap of their token sets strictly exceeds the threshold, and
carries that overlap as its weight. Every node gets a feature vector:
the mean of the pre-trained embeddings of its in-dictionary tokens.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .embeddings import EmbeddingTable
from .errors import FormatError
from .grounding import GroundingRecord, VocabSelection

PRETRAINED = "pretrained"
OOV = "oov"

GRAPH_MAGIC = "kgimpute-graph"
GRAPH_VERSION = 1


def jaccard(a, b) -> float:
    """Set overlap |a∩b| / |a∪b|; 0.0 when both sets are empty."""
    union = len(a | b)
    if union == 0:
        return 0.0
    return len(a & b) / union


def edges_from_token_sets(token_sets, eta: float):
    """All pairs with Jaccard overlap strictly above eta, via inverted index.

    Returns (i, j, weight) triples with i < j, sorted. Pairs sharing no
    token have overlap 0 and can never pass the threshold, so only pairs
    that co-occur in some token bucket are ever scored; the result is
    identical to a brute-force all-pairs scan.
    """
    inverted: dict[str, list[int]] = {}
    for v, tokens in enumerate(token_sets):
        for t in tokens:
            inverted.setdefault(t, []).append(v)
    counts: dict[tuple[int, int], int] = {}
    for bucket in inverted.values():
        k = len(bucket)
        if k < 2:
            continue
        for a in range(k):
            na = bucket[a]
            for b in range(a + 1, k):
                key = (na, bucket[b])
                counts[key] = counts.get(key, 0) + 1
    edges = []
    for (i, j), c in counts.items():
        union = len(token_sets[i]) + len(token_sets[j]) - c
        weight = c / union
        if weight > eta:
            edges.append((i, j, weight))
    edges.sort()
    return edges


@dataclass(eq=False)
class KnowledgeGraph:
    """Undirected weighted graph with node features and supervision targets.

    Adjacency is CSR over node indices, symmetric (each undirected edge
    stored in both rows), rows sorted by neighbor index, no self loops.
    `targets[v]` is meaningful only where `supervised[v]` is True.
    Instances are immutable by convention once built.
    """

    words: list[str]
    kinds: list[str]
    features: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    targets: np.ndarray
    supervised: np.ndarray
    eta: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self._word_index = None
        self._edge_src = None
        self._norm = None

    @property
    def n_nodes(self) -> int:
        return len(self.words)

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @property
    def n_edges(self) -> int:
        return len(self.indices) // 2

    def node_index(self, word: str) -> int | None:
        if self._word_index is None:
            self._word_index = {w: i for i, w in enumerate(self.words)}
        return self._word_index.get(word)

    def neighbors(self, v: int):
        """(neighbor index, weight) pairs for node v, in index order."""
        lo, hi = self.indptr[v], self.indptr[v + 1]
        return list(zip(self.indices[lo:hi].tolist(), self.weights[lo:hi].tolist()))

    @property
    def edge_src(self) -> np.ndarray:
        """Row index of each CSR entry; pairs with `indices` as (src, dst)."""
        if self._edge_src is None:
            self._edge_src = np.repeat(
                np.arange(self.n_nodes, dtype=np.int64), np.diff(self.indptr))
        return self._edge_src

    def norm_constants(self) -> np.ndarray:
        """Per-node 1 + sum of incident edge weights."""
        if self._norm is None:
            norm = np.ones(self.n_nodes, dtype=np.float64)
            np.add.at(norm, self.edge_src, self.weights)
            self._norm = norm
        return self._norm

    def validate(self) -> None:
        n = self.n_nodes
        if n == 0:
            raise ValueError("graph has no nodes")
        if not (0.0 <= self.eta < 1.0):
            raise ValueError("eta must be in [0, 1)")
        if len(self.kinds) != n or self.features.shape[0] != n:
            raise ValueError("node table lengths disagree")
        if self.indptr.shape != (n + 1,) or self.indptr[0] != 0 or self.indptr[-1] != len(self.indices):
            raise ValueError("malformed CSR index pointers")
        if not np.all(np.isfinite(self.features)):
            raise ValueError("non-finite feature component")
        for v, kind in enumerate(self.kinds):
            if (kind == PRETRAINED) != bool(self.supervised[v]):
                raise ValueError(f"node {v}: kind/supervision mismatch")
        if len(self.weights):
            if self.weights.min() <= self.eta or self.weights.max() > 1.0:
                raise ValueError("edge weight outside (eta, 1]")
        seen = {}
        for pos, (v, u) in enumerate(zip(self.edge_src, self.indices)):
            v, u = int(v), int(u)
            if v == u:
                raise ValueError(f"self edge at node {v}")
            seen[(v, u)] = self.weights[pos]
        for (v, u), w in seen.items():
            if seen.get((u, v)) != w:
                raise ValueError(f"asymmetric edge ({v}, {u})")

    def equals(self, other: "KnowledgeGraph") -> bool:
        return (
            self.words == other.words
            and self.kinds == other.kinds
            and abs(self.eta - other.eta) == 0
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.weights, other.weights)
            and np.array_equal(self.supervised, other.supervised)
            and np.array_equal(self.targets[self.supervised], other.targets[other.supervised])
            and self.meta == other.meta
        )

    @classmethod
    def from_edges(cls, words, kinds, features, targets, edges, eta,
                   meta=None) -> "KnowledgeGraph":
        """Assemble a graph from an (i, j, weight) edge list.

        `targets` may be a full (n, dim) array or a map from node index
        to vector; unsupervised rows are zero-filled.
        """
        n = len(words)
        features = np.asarray(features, dtype=np.float64)
        dim = features.shape[1]
        supervised = np.array([k == PRETRAINED for k in kinds], dtype=bool)
        target_arr = np.zeros((n, dim), dtype=np.float64)
        if isinstance(targets, dict):
            for v, vec in targets.items():
                target_arr[v] = vec
        elif targets is not None:
            target_arr = np.asarray(targets, dtype=np.float64).copy()
        rows = [[] for _ in range(n)]
        for i, j, w in edges:
            rows[i].append((j, float(w)))
            rows[j].append((i, float(w)))
        indptr = np.zeros(n + 1, dtype=np.int64)
        indices = []
        weights = []
        for v in range(n):
            rows[v].sort()
            indptr[v + 1] = indptr[v] + len(rows[v])
            for u, w in rows[v]:
                indices.append(u)
                weights.append(w)
        graph = cls(
            words=list(words), kinds=list(kinds), features=features,
            indptr=indptr,
            indices=np.array(indices, dtype=np.int64),
            weights=np.array(weights, dtype=np.float64),
            targets=target_arr, supervised=supervised, eta=float(eta),
            meta=dict(meta or {}))
        graph.validate()
        return graph


def build_graph(
    selection: VocabSelection,
    oov_words,
    corpus,
    table: EmbeddingTable,
    eta: float = 0.5,
    meta: dict | None = None,
) -> KnowledgeGraph:
    """Construct the graph over selected vocabulary plus OOV words.

    A word appearing both in the selection and the OOV list becomes a
    single node; any node present in the embedding table is supervised.
    Nodes without a grounding record get an empty token set and end up
    isolated with a zero feature vector.
    """
    if not (0.0 <= eta < 1.0):
        raise ValueError("eta must satisfy 0 <= eta < 1")
    words: list[str] = []
    seen = set()
    for word in list(selection.selected) + list(oov_words):
        if word not in seen:
            seen.add(word)
            words.append(word)
    if not words:
        raise ValueError("graph would have zero nodes")

    kinds = [PRETRAINED if word in table else OOV for word in words]
    token_sets = []
    for word in words:
        record: GroundingRecord | None = corpus.get(word)
        token_sets.append(record.tokens if record is not None else frozenset())

    dim = table.dim
    features = np.zeros((len(words), dim), dtype=np.float64)
    for v, tokens in enumerate(token_sets):
        in_table = [t for t in sorted(tokens) if t in table]
        if in_table:
            stacked = np.stack([table.lookup(t) for t in in_table])
            features[v] = stacked.mean(axis=0)

    targets = {v: table.lookup(word)
               for v, (word, kind) in enumerate(zip(words, kinds))
               if kind == PRETRAINED}
    edges = edges_from_token_sets(token_sets, eta)
    full_meta = {"skip_top": len(selection.skipped), "n_selected": len(selection.selected)}
    full_meta.update(meta or {})
    return KnowledgeGraph.from_edges(
        words, kinds, features, targets, edges, eta, meta=full_meta)


def save_graph(graph: KnowledgeGraph, path) -> None:
    payload = {
        "magic": GRAPH_MAGIC,
        "version": GRAPH_VERSION,
        "eta": graph.eta,
        "dim": graph.dim,
        "words": graph.words,
        "kinds": graph.kinds,
        "features": graph.features.tolist(),
        "indptr": graph.indptr.tolist(),
        "indices": graph.indices.tolist(),
        "weights": graph.weights.tolist(),
        "targets": [graph.targets[v].tolist() if graph.supervised[v] else None
                    for v in range(graph.n_nodes)],
        "meta": graph.meta,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True)


def load_graph(path) -> KnowledgeGraph:
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise FormatError(f"{path}: not a readable graph file: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("magic") != GRAPH_MAGIC:
        raise FormatError(f"{path}: missing graph magic tag")
    if payload.get("version") != GRAPH_VERSION:
        raise FormatError(
            f"{path}: unsupported graph version {payload.get('version')!r}")
    dim = payload["dim"]
    n = len(payload["words"])
    targets = np.zeros((n, dim), dtype=np.float64)
    for v, row in enumerate(payload["targets"]):
        if row is not None:
            targets[v] = row
    graph = KnowledgeGraph(
        words=list(payload["words"]),
        kinds=list(payload["kinds"]),
        features=np.array(payload["features"], dtype=np.float64).reshape(n, dim),
        indptr=np.array(payload["indptr"], dtype=np.int64),
        indices=np.array(payload["indices"], dtype=np.int64),
        weights=np.array(payload["weights"], dtype=np.float64),
        targets=targets,
        supervised=np.array([row is not None for row in payload["targets"]], dtype=bool),
        eta=float(payload["eta"]),
        meta=dict(payload.get("meta", {})),
    )
    graph.validate()
    return graph
