import numpy as np
import pytest

from kgimpute.errors import TrainingDiverged
from kgimpute.gcn import backward, forward, init_model
from kgimpute.graphbuild import OOV, PRETRAINED, KnowledgeGraph
from kgimpute.trainer import (TrainConfig, _Adam, mse_loss, read_report_jsonl,
                              split_supervised, train, write_report_jsonl)

from helpers import make_random_graph


def small_graph(seed=0, n=5, dim=2):
    rng = np.random.default_rng(seed)
    words = [f"n{i}" for i in range(n)]
    kinds = [PRETRAINED] * n
    feats = rng.normal(size=(n, dim))
    targets = {i: rng.normal(size=dim) for i in range(n)}
    edges = [(0, 1, 0.8)]
    return KnowledgeGraph.from_edges(words, kinds, feats, targets, edges, eta=0.5)


def test_mse_zero_when_output_equals_target():
    g = small_graph()
    model = init_model([2, 2], seed=1)
    trace = forward(g, model)
    trace.activations[-1] = g.targets.copy()
    loss, grad = mse_loss(trace, g, np.arange(5))
    assert loss == 0.0
    assert not grad.any()


def test_mse_hand_example():
    g = KnowledgeGraph.from_edges(
        ["w"], [PRETRAINED], np.array([[1.0, 0.0]]),
        {0: np.array([0.0, 0.0])}, [], eta=0.5)
    model = init_model([2, 2], seed=0)
    trace = forward(g, model)
    trace.activations[-1] = np.array([[1.0, 0.0]])
    loss, grad = mse_loss(trace, g, [0])
    assert loss == 0.5
    assert np.array_equal(grad, [[1.0, 0.0]])


def test_mse_grad_zero_outside_subset():
    rng = np.random.default_rng(2)
    g = make_random_graph(rng, 10, 3, sup_fraction=0.5)
    model = init_model([3, 3], rng=rng)
    trace = forward(g, model)
    subset = np.flatnonzero(g.supervised)
    _, grad = mse_loss(trace, g, subset)
    oov_nodes = np.flatnonzero(~g.supervised)
    assert not grad[oov_nodes].any()


def test_mse_empty_subset_errors():
    g = small_graph()
    trace = forward(g, init_model([2, 2], seed=1))
    with pytest.raises(ValueError):
        mse_loss(trace, g, [])


def test_mse_rejects_unsupervised_nodes():
    rng = np.random.default_rng(3)
    g = make_random_graph(rng, 6, 2, sup_fraction=0.5)
    trace = forward(g, init_model([2, 2], rng=rng))
    with pytest.raises(ValueError):
        mse_loss(trace, g, np.arange(6))


def test_training_descends_on_tiny_graph():
    g = small_graph()
    cfg = TrainConfig(epochs=50, seed=42, val_fraction=0.0, layers=2)
    _, report = train(g, cfg)
    assert report.epochs[-1].train_mse < report.epochs[0].train_mse


def test_training_is_deterministic():
    g = small_graph(seed=1, n=8)
    cfg = TrainConfig(epochs=30, seed=42, layers=2)
    model_a, report_a = train(g, cfg)
    model_b, report_b = train(g, cfg)
    assert model_a.equals(model_b)
    assert report_a == report_b


def test_val_fraction_zero_runs_all_epochs():
    g = small_graph()
    cfg = TrainConfig(epochs=25, seed=0, val_fraction=0.0, layers=1)
    _, report = train(g, cfg)
    assert len(report.epochs) == 25
    assert report.best_val_mse is None
    assert all(s.val_mse is None for s in report.epochs)
    assert report.best_epoch == 25


@pytest.mark.filterwarnings("ignore:overflow encountered")
def test_divergence_aborts_with_epoch():
    g = small_graph(seed=2, n=6)
    cfg = TrainConfig(epochs=50, seed=0, optimizer="sgd", learning_rate=1e9,
                      val_fraction=0.0, layers=2)
    with pytest.raises(TrainingDiverged) as exc:
        train(g, cfg)
    assert "epoch" in str(exc.value)


def test_needs_two_supervised_nodes():
    g = KnowledgeGraph.from_edges(
        ["a", "b"], [PRETRAINED, OOV], np.zeros((2, 2)),
        {0: np.zeros(2)}, [], eta=0.5)
    with pytest.raises(ValueError):
        train(g, TrainConfig())


def test_best_checkpoint_val_loss_reproducible():
    rng = np.random.default_rng(4)
    g = make_random_graph(rng, 30, 3, sup_fraction=0.9)
    cfg = TrainConfig(epochs=60, seed=7, val_fraction=0.2, layers=2)
    model, report = train(g, cfg)
    _, val_idx, _ = split_supervised(g, cfg)
    recomputed = mse_loss(forward(g, model), g, val_idx)[0]
    assert abs(recomputed - report.best_val_mse) < 1e-10
    best = min(s.val_mse for s in report.epochs)
    assert report.best_val_mse == best


def test_early_stopping_respects_patience():
    rng = np.random.default_rng(5)
    g = make_random_graph(rng, 20, 2, sup_fraction=0.9)
    # large sgd steps oscillate, so validation stops improving quickly
    cfg = TrainConfig(epochs=500, seed=1, optimizer="sgd", learning_rate=2.0,
                      val_fraction=0.3, patience=5, layers=1)
    try:
        _, report = train(g, cfg)
    except TrainingDiverged:
        pytest.skip("diverged before early stopping; config too aggressive")
    assert report.provenance["stopped_early"]
    assert len(report.epochs) < 500


def test_one_node_linear_regression_converges():
    # single supervised node, one linear layer: plain least squares that
    # Adam must drive to near-zero error within 2000 steps
    rng = np.random.default_rng(6)
    feature = rng.uniform(-1, 1, size=3)
    target = rng.uniform(-0.5, 0.5, size=3)
    g = KnowledgeGraph.from_edges(
        ["w"], [PRETRAINED], feature[None, :], {0: target}, [], eta=0.5)
    model = init_model([3, 3], rng=np.random.default_rng(0), seed=0)
    adam = _Adam(model, TrainConfig())
    for _ in range(2000):
        trace = forward(g, model)
        _, grad_out = mse_loss(trace, g, [0])
        grads_w, grads_b = backward(g, model, trace, grad_out)
        adam.step(model, grads_w, grads_b)
    final = forward(g, model).output[0]
    assert np.max(np.abs(final - target)) < 1e-3


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(epochs=0).validate()
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=-1.0).validate()
    with pytest.raises(ValueError):
        TrainConfig(optimizer="lbfgs").validate()
    with pytest.raises(ValueError):
        TrainConfig(val_fraction=1.0).validate()
    with pytest.raises(ValueError):
        TrainConfig(layers=3, hidden_dims=(4,)).validate()


def test_hidden_dims_override():
    g = small_graph()
    cfg = TrainConfig(epochs=3, seed=0, layers=3, hidden_dims=(5, 4),
                      val_fraction=0.0)
    model, report = train(g, cfg)
    assert model.dims == [2, 5, 4, 2]
    assert report.provenance["dims"] == [2, 5, 4, 2]


def test_report_jsonl_round_trip(tmp_path):
    g = small_graph(seed=3, n=7)
    _, report = train(g, TrainConfig(epochs=10, seed=9, layers=1))
    path = tmp_path / "report.jsonl"
    write_report_jsonl(report, path)
    loaded = read_report_jsonl(path)
    assert loaded == report
    assert len(path.read_text().splitlines()) == len(report.epochs) + 1
