import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgimpute.errors import FormatError
from kgimpute.graphbuild import (OOV, PRETRAINED, KnowledgeGraph, build_graph,
                                 edges_from_token_sets, jaccard, load_graph,
                                 save_graph)
from kgimpute.grounding import GroundingRecord, VocabSelection, tokenize

from helpers import brute_force_edges, make_random_graph, make_table

token_sets_strategy = st.lists(
    st.frozensets(st.sampled_from("abcdefghij"), max_size=8),
    min_size=2, max_size=12)


def test_jaccard_identical():
    assert jaccard({"x", "y"}, {"x", "y"}) == 1.0


def test_jaccard_disjoint():
    assert jaccard({"x"}, {"y"}) == 0.0


def test_jaccard_half():
    assert jaccard({"a", "b", "c"}, {"b", "c", "d"}) == 0.5


def test_jaccard_both_empty():
    assert jaccard(set(), set()) == 0.0


@given(st.frozensets(st.sampled_from("abcdef")), st.frozensets(st.sampled_from("abcdef")))
def test_jaccard_symmetric_and_bounded(a, b):
    assert jaccard(a, b) == jaccard(b, a)
    assert 0.0 <= jaccard(a, b) <= 1.0


def record(word, text):
    return GroundingRecord(word, text, "", tokenize(text))


def build(selection_words, oov_words, corpus_texts, table, eta=0.5):
    corpus = {w: record(w, t) for w, t in corpus_texts.items()}
    selection = VocabSelection(skipped=(), selected=tuple(selection_words))
    return build_graph(selection, oov_words, corpus, table, eta=eta)


def test_identical_token_sets_edge_weight_one(tiny_table):
    g = build(["a", "b"], [], {"a": "same words here", "b": "same words here"},
              tiny_table)
    assert g.n_edges == 1
    assert g.neighbors(0) == [(1, 1.0)]


def test_boundary_jaccard_exactly_eta_no_edge(tiny_table):
    # token sets {p,q,r} and {q,r,s}: overlap exactly 0.5
    g = build(["a", "b"], [], {"a": "p q r", "b": "q r s"}, tiny_table, eta=0.5)
    assert g.n_edges == 0


def test_feature_mean_over_in_table_tokens_only(tiny_table):
    g = build(["a"], ["w"], {"w": "a zzz"}, tiny_table)
    v = g.node_index("w")
    assert np.array_equal(g.features[v], [1.0, 0.0])


def test_feature_mean_multiple_tokens(tiny_table):
    # a=[1,0], c=[2,0] -> mean [1.5, 0]
    g = build(["a"], ["w"], {"w": "a c zzz"}, tiny_table)
    assert np.array_equal(g.features[g.node_index("w")], [1.5, 0.0])


def test_word_in_both_selection_and_oov_is_pretrained(tiny_table):
    g = build(["a", "b"], ["a", "x"], {}, tiny_table)
    assert g.words.count("a") == 1
    assert g.kinds[g.node_index("a")] == PRETRAINED
    assert g.kinds[g.node_index("x")] == OOV


def test_missing_grounding_record_gives_isolated_zero_node(tiny_table):
    g = build(["a"], ["ghost"], {"a": "a b c"}, tiny_table)
    v = g.node_index("ghost")
    assert not g.features[v].any()
    assert g.neighbors(v) == []


def test_zero_nodes_error(tiny_table):
    selection = VocabSelection(skipped=(), selected=())
    with pytest.raises(ValueError):
        build_graph(selection, [], {}, tiny_table)


def test_duplicate_oov_words_dedup(tiny_table):
    g = build(["a"], ["x", "x", "x"], {}, tiny_table)
    assert g.words.count("x") == 1


def test_targets_present_iff_pretrained(tiny_table):
    g = build(["a", "b"], ["x"], {}, tiny_table)
    assert g.supervised[g.node_index("a")]
    assert not g.supervised[g.node_index("x")]
    assert np.array_equal(g.targets[g.node_index("a")], [1.0, 0.0])
    assert np.array_equal(g.targets[g.node_index("b")], [0.0, 1.0])


def test_eta_and_selection_provenance_in_meta(tiny_table):
    selection = VocabSelection(skipped=("the",), selected=("a",))
    g = build_graph(selection, [], {}, tiny_table, eta=0.25,
                    meta={"v_prime_size": 9})
    assert g.eta == 0.25
    assert g.meta["skip_top"] == 1
    assert g.meta["v_prime_size"] == 9


@pytest.mark.parametrize("seed", range(10))
def test_inverted_index_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    vocab = [f"t{i}" for i in range(60)]
    n = int(rng.integers(2, 40))
    token_sets = []
    for _ in range(n):
        size = int(rng.integers(0, 12))
        token_sets.append(frozenset(rng.choice(vocab, size=size, replace=False)))
    eta = float(rng.choice([0.0, 0.3, 0.5, 0.8]))
    assert edges_from_token_sets(token_sets, eta) == brute_force_edges(token_sets, eta)


@given(token_sets_strategy)
@settings(max_examples=100, deadline=None)
def test_edges_match_brute_force_property(token_sets):
    assert edges_from_token_sets(token_sets, 0.5) == brute_force_edges(token_sets, 0.5)


@given(token_sets_strategy, st.floats(0.0, 0.98), st.floats(0.0, 0.98))
@settings(max_examples=100, deadline=None)
def test_raising_eta_never_adds_edges(token_sets, eta1, eta2):
    lo, hi = sorted((eta1, eta2))
    at_lo = {(i, j) for i, j, _ in edges_from_token_sets(token_sets, lo)}
    at_hi = {(i, j) for i, j, _ in edges_from_token_sets(token_sets, hi)}
    assert at_hi <= at_lo


def test_features_invariant_to_text_token_order(tiny_table):
    g1 = build(["a"], ["w"], {"w": "a c b"}, tiny_table)
    g2 = build(["a"], ["w"], {"w": "b c a"}, tiny_table)
    assert np.array_equal(g1.features, g2.features)


def test_oov_oov_edges_allowed(tiny_table):
    g = build(["a"], ["x", "y"], {"x": "shared stuff", "y": "shared stuff"},
              tiny_table)
    vx, vy = g.node_index("x"), g.node_index("y")
    assert (vy, 1.0) in g.neighbors(vx)


def test_built_graph_validates(tiny_table):
    g = build(["a", "b"], ["x"], {"a": "p q r", "b": "p q r s", "x": "p q"},
              tiny_table, eta=0.1)
    g.validate()
    # symmetry spot check
    for v in range(g.n_nodes):
        for u, w in g.neighbors(v):
            assert (v, w) in g.neighbors(u)


def test_save_load_round_trip(tmp_path, tiny_table):
    g = build(["a", "b"], ["x"], {"a": "p q r", "b": "p q r", "x": "p q r z"},
              tiny_table)
    path = tmp_path / "g.json"
    save_graph(g, path)
    assert load_graph(path).equals(g)


def test_save_graph_without_edges(tmp_path, tiny_table):
    g = build(["a"], [], {}, tiny_table)
    assert g.n_edges == 0
    path = tmp_path / "g.json"
    save_graph(g, path)
    assert load_graph(path).equals(g)


def test_load_truncated_file_errors(tmp_path, tiny_table):
    g = build(["a", "b"], [], {"a": "p q", "b": "p q"}, tiny_table)
    path = tmp_path / "g.json"
    save_graph(g, path)
    path.write_bytes(path.read_bytes()[:50])
    with pytest.raises(FormatError):
        load_graph(path)


def test_load_wrong_magic_errors(tmp_path):
    path = tmp_path / "g.json"
    path.write_text('{"magic": "something-else", "version": 1}')
    with pytest.raises(FormatError):
        load_graph(path)


def test_load_wrong_version_errors(tmp_path, tiny_table):
    import json
    g = build(["a"], [], {}, tiny_table)
    path = tmp_path / "g.json"
    save_graph(g, path)
    payload = json.loads(path.read_text())
    payload["version"] = 99
    path.write_text(json.dumps(payload))
    with pytest.raises(FormatError):
        load_graph(path)


def test_from_edges_rejects_self_edge():
    with pytest.raises(ValueError):
        KnowledgeGraph.from_edges(
            ["a"], [OOV], np.zeros((1, 2)), None, [(0, 0, 0.9)], eta=0.5)


def test_from_edges_rejects_weight_at_or_below_eta():
    with pytest.raises(ValueError):
        KnowledgeGraph.from_edges(
            ["a", "b"], [OOV, OOV], np.zeros((2, 2)), None, [(0, 1, 0.5)],
            eta=0.5)


def test_random_graph_helper_validates():
    rng = np.random.default_rng(0)
    g = make_random_graph(rng, 12, 3)
    g.validate()
