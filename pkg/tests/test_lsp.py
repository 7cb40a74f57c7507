"""Local-structure loss against a brute-force kernel/softmax/KL oracle."""

import numpy as np
import pytest

from kgdistill.graph import HeteroGraph, Relation
from kgdistill.lsp import (
    build_neighbor_structure,
    local_structure_profiles,
    lsp_loss_and_layer_grads,
)
from kgdistill.model import backprop_layers, forward_pass, init_params
from kgdistill.rng import rng_stream


def brute_force_lsp(graph, teacher_hidden, student_hidden, sigma, layers):
    """Direct evaluation over python dicts: neighbor lists, RBF kernel,
    softmax, KL - no shared code with the production path."""
    flat = {}
    order = []
    for t, n in graph.node_counts.items():
        for i in range(n):
            order.append((t, i))
    neighbors = {key: [] for key in order}
    for rel in graph.relations:
        src, dst = graph.edges[rel.name]
        for s, d in zip(src.tolist(), dst.tolist()):
            neighbors[(rel.src_type, s)].append((rel.dst_type, d))
            neighbors[(rel.dst_type, d)].append((rel.src_type, s))

    def profile(hidden, center, nbrs):
        hv = hidden[center[0]][center[1]]
        logits = []
        for (t, i) in nbrs:
            logits.append(-float(np.sum((hv - hidden[t][i]) ** 2)) / (2 * sigma**2))
        logits = np.array(logits)
        e = np.exp(logits - logits.max())
        return e / e.sum()

    centers = [key for key in order if neighbors[key]]
    total = 0.0
    for l in layers:
        for c in centers:
            p = profile(teacher_hidden[l], c, neighbors[c])
            q = profile(student_hidden[l], c, neighbors[c])
            total += float(np.sum(p * (np.log(p) - np.log(q))))
    return total / (len(centers) * len(layers))


def five_node_graph():
    # path through both types plus one parallel edge
    return HeteroGraph(
        {"x": 3, "y": 2},
        [Relation("e", "x", "y"), Relation("f", "y", "x")],
        {
            "e": (np.array([0, 1, 1]), np.array([0, 0, 1])),
            "f": (np.array([1]), np.array([2])),
        },
    )


class TestLspOracle:
    def test_matches_brute_force_on_hand_built_graph(self):
        g = five_node_graph()
        teacher = init_params(g, 6, 2, rng_stream(0, "init"))
        student = init_params(g, 3, 2, rng_stream(1, "init"))
        structure = build_neighbor_structure(g)
        sigma = 0.7
        layers = [1, 2]
        tc = forward_pass(teacher, g)
        sc = forward_pass(student, g)
        profiles = {l: local_structure_profiles(tc.hidden[l], structure, sigma) for l in layers}
        loss, _ = lsp_loss_and_layer_grads(sc, profiles, structure, sigma, layers)
        expected = brute_force_lsp(g, tc.hidden, sc.hidden, sigma, layers)
        assert loss == pytest.approx(expected, abs=1e-10)

    def test_identical_models_zero_loss(self):
        g = five_node_graph()
        model = init_params(g, 4, 2, rng_stream(2, "init"))
        structure = build_neighbor_structure(g)
        cache = forward_pass(model, g)
        profiles = {l: local_structure_profiles(cache.hidden[l], structure, 1.0) for l in (1, 2)}
        loss, grads = lsp_loss_and_layer_grads(cache, profiles, structure, 1.0, [1, 2])
        assert loss == pytest.approx(0.0, abs=1e-14)
        for per_type in grads.values():
            for a in per_type.values():
                np.testing.assert_allclose(a, 0.0, atol=1e-14)

    def test_single_neighbor_contributes_zero(self):
        # both profiles are the point mass 1.0
        g = HeteroGraph(
            {"x": 2}, [Relation("e", "x", "x")], {"e": (np.array([0]), np.array([1]))}
        )
        teacher = init_params(g, 5, 1, rng_stream(3, "init"))
        student = init_params(g, 2, 1, rng_stream(4, "init"))
        structure = build_neighbor_structure(g)
        tc, sc = forward_pass(teacher, g), forward_pass(student, g)
        profiles = {1: local_structure_profiles(tc.hidden[1], structure, 1.0)}
        np.testing.assert_allclose(profiles[1], 1.0)
        loss, _ = lsp_loss_and_layer_grads(sc, profiles, structure, 1.0, [1])
        assert loss == pytest.approx(0.0, abs=1e-14)

    def test_isolated_nodes_skipped(self):
        g = HeteroGraph(
            {"x": 5}, [Relation("e", "x", "x")], {"e": (np.array([0]), np.array([1]))}
        )
        structure = build_neighbor_structure(g)
        assert structure.n_centers == 2  # nodes 2..4 are isolated


class TestLspGradient:
    def test_matches_finite_differences(self):
        g = five_node_graph()
        teacher = init_params(g, 5, 2, rng_stream(5, "init"))
        student = init_params(g, 3, 2, rng_stream(6, "init"))
        structure = build_neighbor_structure(g)
        sigma = 0.9
        layers = [1, 2]
        tc = forward_pass(teacher, g)
        profiles = {l: local_structure_profiles(tc.hidden[l], structure, sigma) for l in layers}

        def loss_of(p):
            c = forward_pass(p, g)
            val, _ = lsp_loss_and_layer_grads(c, profiles, structure, sigma, layers)
            return val

        cache = forward_pass(student, g)
        _, layer_grads = lsp_loss_and_layer_grads(cache, profiles, structure, sigma, layers)
        grads = backprop_layers(student, g, cache, layer_grads)
        grad_map = dict(grads.tensors())

        eps = 1e-5
        for name, arr in student.tensors():
            it = np.nditer(arr, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                orig = arr[idx]
                arr[idx] = orig + eps
                lp = loss_of(student)
                arr[idx] = orig - eps
                lm = loss_of(student)
                arr[idx] = orig
                fd = (lp - lm) / (2 * eps)
                assert abs(fd - grad_map[name][idx]) <= 1e-4 * max(
                    abs(fd), abs(grad_map[name][idx]), 1e-4
                ), name
