"""Smoke tests for the python bindings."""

import math

import numpy as np
import pytest

import genet


def tiny_graph():
    kinds = [genet.NodeKind.User] * 2 + [genet.NodeKind.Item] * 2
    edges = [
        (genet.EdgeTag.SocialCircle, [0, 1]),
        (genet.EdgeTag.Category, [2, 3]),
    ]
    return genet.Hypergraph.build(kinds, edges)


def test_hypergraph_queries():
    g = tiny_graph()
    assert g.node_count == 4
    assert g.edge_count == 2
    assert g.node_degree(0) == 1
    assert g.edge_degree(1) == 2
    assert g.adjacent(0, 1)
    assert not g.adjacent(0, 2)
    assert g.members_of(0) == [0, 1]


def test_errors_surface_as_python_exceptions():
    with pytest.raises(genet.GenetError):
        genet.Hypergraph.build([genet.NodeKind.User], [(genet.EdgeTag.Brand, [5])])


def test_encoding_matches_the_mean_rule():
    g = tiny_graph()
    theta = np.arange(12, dtype=float).reshape(4, 3)
    E = genet.encode_edges(g, theta)
    assert E.shape == (2, 3)
    np.testing.assert_allclose(E[0], theta[[0, 1]].mean(axis=0))
    X = genet.encode_nodes(g, E)
    np.testing.assert_allclose(X[0], E[0])


def test_update_adds_cross_incidences():
    g = tiny_graph()
    updated = g.updated_with([(0, 2, 1)])
    assert updated.incident(0, 1)
    assert updated.incident(2, 0)


def test_pretraining_is_deterministic_and_learns():
    data = genet.gen_planted(6, 5)
    cfg = genet.PretrainConfig()
    cfg.dim = 8
    cfg.epochs = 25
    cfg.batch_size = 64
    cfg.learning_rate = 0.01
    cfg.seed = 3

    a = genet.run_pretraining(data.graph, cfg)
    b = genet.run_pretraining(data.graph, cfg)
    assert a.history[-1].total == b.history[-1].total
    np.testing.assert_array_equal(a.node_embeddings, b.node_embeddings)
    assert a.history[-1].total < a.history[0].total
    assert a.node_embeddings.shape == (30, 8)


def test_full_python_pipeline():
    data = genet.gen_feedback(40, 16, 4, 6, 0.9, seed=5)
    split = genet.leave_one_out_split(data.interactions)

    cfg = genet.PretrainConfig()
    cfg.dim = 8
    cfg.epochs = 10
    cfg.batch_size = 256
    cfg.learning_rate = 0.005
    cfg.seed = 5
    pre = genet.run_pretraining(data.graph, cfg)

    fcfg = genet.FinetuneConfig()
    fcfg.epochs = 4
    fcfg.seed = 5
    result = genet.run_finetune(genet.Task.TopN, data.graph, pre, split.train, 40, 16, fcfg)
    assert result.history[-1] < result.history[0]

    report = genet.evaluate_split(
        genet.Task.TopN, split, result.user_embeddings, result.item_embeddings, 40
    )
    assert 0.0 <= report.ndcg10 <= report.recall10 <= 1.0


def test_metrics_closed_forms():
    report = genet.compute_metrics([1, 2, 15])
    assert report.recall10 == pytest.approx(2 / 3)
    assert report.ndcg10 == pytest.approx((1 + 1 / math.log2(3)) / 3, abs=1e-6)


def test_kmeans_recovers_blobs():
    pts = [(0.0, 0.0), (0.0, 0.1), (10.0, 10.0), (10.0, 10.1)]
    assignment, centroids = genet.kmeans(pts, 2, seed=1)
    assert assignment[0] == assignment[1]
    assert assignment[2] == assignment[3]
    assert assignment[0] != assignment[2]
    assert len(centroids) == 2
