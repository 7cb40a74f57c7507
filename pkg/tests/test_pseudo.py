import numpy as np
import pytest

from kgdistill.errors import SamplingError
from kgdistill.graph import HeteroGraph, Relation, TripleSet
from kgdistill.model import encode, init_params, sigmoid
from kgdistill.pseudo import (
    EpochLabelCache,
    RandomGraphSpec,
    degree_weights,
    epoch_random_labels,
    generate_random_graph,
    teacher_pseudo_labels,
)
from kgdistill.rng import rng_stream

from conftest import degree_prescribed_graph


def src_counts(triples, n):
    return np.bincount(triples.src, minlength=n)


class TestDegreeWeights:
    def test_power_one_proportional(self):
        g = degree_prescribed_graph([2, 2, 2, 2])
        np.testing.assert_allclose(degree_weights(g, "r", "src", 1.0), 0.25)

    def test_power_modification_hand_normalized(self):
        # degrees [1, 3], power 1.5: weights [1, 5.196...], within 1e-12
        g = degree_prescribed_graph([1, 3])
        w = degree_weights(g, "r", "src", 1.5)
        expected = np.array([1.0, 3.0**1.5])
        expected = expected / expected.sum()
        np.testing.assert_allclose(w, expected, rtol=0, atol=1e-12)
        assert expected[1] == pytest.approx(5.196152422706632 / (1 + 5.196152422706632))

    def test_all_zero_degree_errors_with_relation_name(self):
        g = HeteroGraph({"u": 2, "v": 2}, [Relation("lonely", "u", "v")], {"lonely": ([], [])})
        with pytest.raises(SamplingError, match="lonely"):
            degree_weights(g, "lonely", "src", 1.0)


class TestGenerateRandomGraph:
    def test_uniform_degrees_uniform_frequencies(self):
        g = degree_prescribed_graph([2, 2, 2, 2])
        spec = RandomGraphSpec(k=10_000, relations=["r"])
        triples = generate_random_graph(g, spec, rng_stream(0, "rg"))
        counts = src_counts(triples, 4)
        # 4 sigma of Binomial(k, 1/4)
        sigma = np.sqrt(10_000 * 0.25 * 0.75)
        assert np.all(np.abs(counts - 2_500) <= 4 * sigma)

    def test_zero_degree_never_sampled(self):
        g = degree_prescribed_graph([1, 0, 3])
        spec = RandomGraphSpec(k=40_000, relations=["r"])
        triples = generate_random_graph(g, spec, rng_stream(1, "rg"))
        counts = src_counts(triples, 3)
        assert counts[1] == 0
        for node, p in ((0, 0.25), (2, 0.75)):
            sigma = np.sqrt(40_000 * p * (1 - p))
            assert abs(counts[node] - 40_000 * p) <= 4 * sigma

    def test_power_reweighting_frequencies(self):
        g = degree_prescribed_graph([1, 3])
        spec = RandomGraphSpec(k=40_000, power=1.5, relations=["r"])
        triples = generate_random_graph(g, spec, rng_stream(2, "rg"))
        counts = src_counts(triples, 2)
        p = np.array([1.0, 3.0**1.5])
        p = p / p.sum()
        for node in (0, 1):
            sigma = np.sqrt(40_000 * p[node] * (1 - p[node]))
            assert abs(counts[node] - 40_000 * p[node]) <= 4 * sigma

    def test_k_edges_per_relation_with_duplicates_kept(self, two_type_graph):
        spec = RandomGraphSpec(k=500)
        triples = generate_random_graph(two_type_graph, spec, rng_stream(3, "rg"))
        assert len(triples) == 500 * len(two_type_graph.relations)
        for rid, rel in enumerate(two_type_graph.relations):
            assert int(np.sum(triples.rel_ids == rid)) == 500

    def test_deterministic_given_stream(self, two_type_graph):
        spec = RandomGraphSpec(k=64)
        a = generate_random_graph(two_type_graph, spec, rng_stream(5, "rg"))
        b = generate_random_graph(two_type_graph, spec, rng_stream(5, "rg"))
        np.testing.assert_array_equal(a.src, b.src)
        np.testing.assert_array_equal(a.dst, b.dst)


class TestTeacherLabels:
    def test_logit_zero_gives_half(self, two_type_graph):
        teacher = init_params(two_type_graph, 4, 1, rng_stream(0, "init"))
        for _name, a in teacher.tensors():
            a[...] = 0.0  # every score is exactly 0
        triples = two_type_graph.triples(["r1"])
        labels = teacher_pseudo_labels(teacher, two_type_graph, triples)
        np.testing.assert_allclose(labels.targets, 0.5)
        assert labels.kind == "teacher-soft"

    def test_threshold_filters_and_sigmoids(self, two_type_graph):
        # hand-built embeddings give logits [2.5, 1.0, -3.0]
        teacher = init_params(two_type_graph, 1, 1, rng_stream(0, "init"))
        h = {"a": np.array([[2.5], [1.0], [-3.0]]), "b": np.ones((4, 1))}
        triples = TripleSet(np.zeros(3, np.int64), np.array([0, 1, 2]), np.array([0, 1, 2]))
        teacher.rel_embed["r1"] = np.ones(1)
        labels = teacher_pseudo_labels(
            teacher, two_type_graph, triples, threshold=2.0, teacher_embeddings=h
        )
        assert len(labels) == 1
        assert labels.targets[0] == pytest.approx(sigmoid(np.array([2.5]))[0])
        assert labels.targets[0] == pytest.approx(0.9241, abs=1e-4)

    def test_two_sided_threshold_keeps_confident_negatives(self, two_type_graph):
        teacher = init_params(two_type_graph, 1, 1, rng_stream(0, "init"))
        h = {"a": np.array([[2.5], [1.0], [-3.0]]), "b": np.ones((4, 1))}
        triples = TripleSet(np.zeros(3, np.int64), np.array([0, 1, 2]), np.array([0, 1, 2]))
        teacher.rel_embed["r1"] = np.ones(1)
        labels = teacher_pseudo_labels(
            teacher, two_type_graph, triples, threshold=2.0, two_sided=True, teacher_embeddings=h
        )
        assert len(labels) == 2

    def test_no_threshold_keeps_everything(self, two_type_graph):
        teacher = init_params(two_type_graph, 4, 2, rng_stream(1, "init"))
        triples = two_type_graph.triples()
        labels = teacher_pseudo_labels(teacher, two_type_graph, triples)
        assert len(labels) == len(triples)
        assert np.all((labels.targets > 0) & (labels.targets < 1))

    def test_teacher_params_untouched(self, two_type_graph):
        teacher = init_params(two_type_graph, 4, 2, rng_stream(1, "init"))
        before = {n: a.copy() for n, a in teacher.tensors()}
        triples = two_type_graph.triples()
        teacher_pseudo_labels(teacher, two_type_graph, triples, threshold=1.0)
        for name, a in teacher.tensors():
            np.testing.assert_array_equal(a, before[name])


class TestEpochCache:
    def make_cache(self, graph, spec, seed=0):
        teacher = init_params(graph, 4, 2, rng_stream(9, "init"))
        return EpochLabelCache(teacher, graph, spec, rng_stream(seed, "rg"))

    def edges_of(self, labels):
        return (labels.triples.src.tolist(), labels.triples.dst.tolist())

    def test_regenerate_every_epoch_differs(self, two_type_graph):
        cache = self.make_cache(two_type_graph, RandomGraphSpec(k=128, regenerate_every=1))
        a = cache.labels_for_epoch(0)
        ea = self.edges_of(a)
        b = cache.labels_for_epoch(1)
        assert ea != self.edges_of(b)

    def test_fixed_graph_identical_every_epoch(self, two_type_graph):
        cache = self.make_cache(two_type_graph, RandomGraphSpec(k=128, regenerate_every=0))
        a = self.edges_of(cache.labels_for_epoch(0))
        for epoch in (1, 2, 17):
            assert self.edges_of(cache.labels_for_epoch(epoch)) == a

    def test_occasional_regeneration_every_five(self, two_type_graph):
        cache = self.make_cache(two_type_graph, RandomGraphSpec(k=128, regenerate_every=5))
        sets = [self.edges_of(cache.labels_for_epoch(e)) for e in range(6)]
        assert all(s == sets[0] for s in sets[1:5])
        assert sets[5] != sets[0]

    def test_same_epoch_twice_cached(self, two_type_graph):
        cache = self.make_cache(two_type_graph, RandomGraphSpec(k=64, regenerate_every=1))
        a = cache.labels_for_epoch(3)
        b = cache.labels_for_epoch(3)
        assert a is b

    def test_budget_counts_live_and_cumulative(self, two_type_graph):
        k, rels = 64, len(two_type_graph.relations)
        cache = self.make_cache(two_type_graph, RandomGraphSpec(k=k, regenerate_every=1))
        epochs = 10
        for e in range(epochs):
            cache.labels_for_epoch(e)
            cache.budget.observe_epoch()
        assert cache.budget.cumulative_generated == epochs * k * rels
        assert cache.budget.peak_live <= k * rels
        assert len(cache.budget.live_history) == epochs

    def test_functional_wrapper(self, two_type_graph):
        teacher = init_params(two_type_graph, 4, 2, rng_stream(9, "init"))
        spec = RandomGraphSpec(k=32, regenerate_every=1)
        labels, cache = epoch_random_labels(
            teacher, two_type_graph, spec, 0, rng=rng_stream(1, "rg")
        )
        assert len(labels) == 32 * len(two_type_graph.relations)
        labels2, _ = epoch_random_labels(teacher, two_type_graph, spec, 0, cache=cache)
        assert labels2 is labels
