"""Assemble final embeddings: dictionary vectors plus imputed OOV vectors."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .embeddings import EmbeddingTable, save_embeddings
from .gcn import GcnModel, forward
from .graphbuild import OOV, KnowledgeGraph

MODES = ("gnn", "node_feature")

PROV_PRETRAINED = "pretrained"
PROV_IMPUTED = "imputed"
PROV_BASELINE = "node_feature_baseline"
PROV_ZERO = "zero"


@dataclass
class ImputationResult:
    """Word vectors with per-word provenance and warnings worth surfacing."""

    vectors: dict[str, np.ndarray]
    provenance: dict[str, str]
    report: list[dict] = field(default_factory=list)

    def save(self, path, precision: int = 9) -> None:
        save_embeddings(self.vectors.items(), path, precision=precision)


def impute(
    g: KnowledgeGraph,
    model: GcnModel | None,
    table: EmbeddingTable,
    mode: str = "gnn",
    requested=None,
) -> ImputationResult:
    """Produce vectors for every dictionary word and every OOV graph node.

    mode="gnn" assigns OOV nodes their final-layer network output;
    mode="node_feature" assigns the raw node feature instead (the
    ablation that skips the network). Dictionary words always pass
    through untouched. Words in `requested` that are nowhere to be
    found fall back to the zero vector, with a warning in the report.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if table.dim != g.dim:
        raise ValueError(f"table dim {table.dim} != graph dim {g.dim}")
    if mode == "gnn":
        if model is None:
            raise ValueError("gnn mode needs a trained model")
        if model.dims[-1] != table.dim:
            raise ValueError(
                f"model output dim {model.dims[-1]} != table dim {table.dim}")
        outputs = forward(g, model).output
    else:
        outputs = g.features

    vectors: dict[str, np.ndarray] = {}
    provenance: dict[str, str] = {}
    report: list[dict] = []

    for word, vec in table.items():
        vectors[word] = vec.copy()
        provenance[word] = PROV_PRETRAINED

    oov_prov = PROV_IMPUTED if mode == "gnn" else PROV_BASELINE
    for v, (word, kind) in enumerate(zip(g.words, g.kinds)):
        if kind != OOV:
            continue
        vectors[word] = outputs[v].copy()
        provenance[word] = oov_prov
        if g.indptr[v + 1] == g.indptr[v]:
            issue = ("isolated_zero_feature" if not g.features[v].any()
                     else "isolated")
            report.append({"word": word, "issue": issue})

    for word in requested or []:
        if word not in vectors:
            vectors[word] = np.zeros(g.dim, dtype=np.float64)
            provenance[word] = PROV_ZERO
            report.append({"word": word, "issue": "not_in_graph"})

    return ImputationResult(vectors=vectors, provenance=provenance, report=report)
