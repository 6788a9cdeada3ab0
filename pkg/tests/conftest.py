import numpy as np
import pytest

from kgimpute.embeddings import EmbeddingTable
from kgimpute.graphbuild import OOV, PRETRAINED, KnowledgeGraph
from kgimpute.synth import generate_world, write_fixture


@pytest.fixture
def tiny_table():
    return EmbeddingTable(dim=2, entries={
        "a": np.array([1.0, 0.0]),
        "b": np.array([0.0, 1.0]),
        "c": np.array([2.0, 0.0]),
    })


@pytest.fixture
def two_node_graph():
    """Nodes a (supervised) and b (OOV) joined by a weight-1 edge."""
    return KnowledgeGraph.from_edges(
        words=["a", "b"], kinds=[PRETRAINED, OOV],
        features=np.array([[1.0, 0.0], [0.0, 1.0]]),
        targets={0: np.array([1.0, 0.0])},
        edges=[(0, 1, 1.0)], eta=0.5)


@pytest.fixture(scope="session")
def synth_world():
    return generate_world(seed=42)


@pytest.fixture(scope="session")
def synth_fixture(tmp_path_factory, synth_world):
    """Synthetic world written to disk as pipeline input files."""
    out_dir = tmp_path_factory.mktemp("synthfixture")
    return write_fixture(synth_world, out_dir)
