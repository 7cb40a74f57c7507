import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgdistill.errors import MetricError
from kgdistill.metrics import auprc, macro_auprc, relative_gains


def brute_force_ap(scores, labels):
    """Rank by descending score (distinct scores assumed), accumulate
    precision at each positive in rank order."""
    order = sorted(range(len(scores)), key=lambda i: -scores[i])
    tp = 0
    total = 0.0
    for rank, i in enumerate(order, start=1):
        if labels[i] == 1:
            tp += 1
            total += tp / rank
    return total / sum(labels)


def tie_oracle_ap(scores, labels):
    """Exact expected AP over all orderings of tied groups, by enumeration."""
    values = sorted(set(scores), reverse=True)
    groups = [[i for i in range(len(scores)) if scores[i] == v] for v in values]
    perms_per_group = [list(itertools.permutations(g)) for g in groups]
    aps = []
    for combo in itertools.product(*perms_per_group):
        order = [i for group in combo for i in group]
        tp = 0
        total = 0.0
        for rank, i in enumerate(order, start=1):
            if labels[i] == 1:
                tp += 1
                total += tp / rank
        aps.append(total / sum(labels))
    return float(np.mean(aps))


class TestAuprc:
    def test_perfect_separation(self):
        assert auprc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]) == 1.0

    def test_hand_computed_example(self):
        # ranks: 0.9 (pos, P=1), 0.8 (neg), 0.1 (pos, P=2/3)
        value = auprc([0.9, 0.8, 0.1], [1, 0, 1])
        assert value == pytest.approx((1.0 + 2.0 / 3.0) / 2.0)

    def test_random_scores_near_positive_rate(self):
        rng = np.random.default_rng(17)
        n = 10_000
        scores = rng.random(n)
        labels = np.array([1, 0] * (n // 2))
        assert abs(auprc(scores, labels) - 0.5) < 0.02

    def test_matches_brute_force_exactly_on_distinct_scores(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            n = int(rng.integers(2, 13))
            scores = rng.permutation(n) + rng.random(n) * 0.5
            labels = rng.integers(0, 2, n)
            if labels.min() == labels.max():
                labels[0] = 1 - labels[0]
            assert auprc(scores, labels) == brute_force_ap(scores.tolist(), labels.tolist())

    def test_tie_handling_matches_permutation_enumeration(self):
        cases = [
            ([1.0, 1.0, 0.5], [1, 0, 1]),
            ([0.7, 0.7, 0.7, 0.2], [1, 0, 1, 0]),
            ([0.9, 0.5, 0.5, 0.5, 0.1], [0, 1, 1, 0, 1]),
            ([0.4, 0.4, 0.4, 0.4], [1, 1, 0, 0]),
        ]
        for scores, labels in cases:
            assert auprc(scores, labels) == pytest.approx(
                tie_oracle_ap(scores, labels), abs=1e-12
            )

    def test_tie_result_order_independent(self):
        scores = [0.5, 0.5, 0.5, 0.2, 0.8]
        labels = [1, 0, 1, 0, 1]
        base = auprc(scores, labels)
        rng = np.random.default_rng(0)
        for _ in range(10):
            perm = rng.permutation(len(scores))
            assert auprc(np.array(scores)[perm], np.array(labels)[perm]) == base

    def test_single_class_rejected(self):
        with pytest.raises(MetricError):
            auprc([0.1, 0.2], [1, 1])
        with pytest.raises(MetricError):
            auprc([0.1, 0.2], [0, 0])

    @given(
        labels=st.lists(st.sampled_from([0, 1]), min_size=2, max_size=12).filter(
            lambda ls: 0 < sum(ls) < len(ls)
        ),
        data=st.data(),
    )
    @settings(max_examples=80, deadline=None)
    def test_raising_a_positive_never_decreases_ap(self, labels, data):
        rng = np.random.default_rng(data.draw(st.integers(0, 2**31 - 1)))
        scores = rng.random(len(labels))
        pos_idx = data.draw(st.sampled_from([i for i, l in enumerate(labels) if l == 1]))
        before = auprc(scores, labels)
        bumped = scores.copy()
        bumped[pos_idx] += data.draw(st.floats(0.01, 2.0))
        assert auprc(bumped, labels) >= before - 1e-12

    @given(st.integers(0, 2**31 - 1))
    @settings(max_examples=40, deadline=None)
    def test_monotone_transform_invariance(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 30))
        scores = rng.standard_normal(n)
        labels = rng.integers(0, 2, n)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        base = auprc(scores, labels)
        assert auprc(3.0 * scores + 7.0, labels) == pytest.approx(base, abs=1e-12)
        assert auprc(np.tanh(scores), labels) == pytest.approx(base, abs=1e-12)


class TestMacro:
    def test_mean_of_two_relations(self):
        per_rel = {
            "a": ([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]),  # 1.0
            "b": ([0.9, 0.8, 0.1], [1, 0, 1]),  # 0.8333...
        }
        assert macro_auprc(per_rel) == pytest.approx((1.0 + 5.0 / 6.0) / 2.0)

    def test_singleton(self):
        per_rel = {"a": ([0.9, 0.1], [1, 0])}
        assert macro_auprc(per_rel) == auprc([0.9, 0.1], [1, 0])

    def test_size_invariance(self):
        rng = np.random.default_rng(5)
        small = ([0.9, 0.8, 0.3, 0.1], [1, 0, 1, 0])
        big_scores = rng.random(10_000)
        big_labels = rng.integers(0, 2, 10_000)
        big_labels[0], big_labels[1] = 0, 1
        value_small_first = macro_auprc({"s": small, "b": (big_scores, big_labels)})
        expected = (auprc(*small) + auprc(big_scores, big_labels)) / 2
        assert value_small_first == pytest.approx(expected, abs=1e-12)


class TestRelativeGains:
    def test_self_comparison_zero(self):
        scores = {45: 0.8, 46: 0.7}
        g = relative_gains(scores, scores)
        assert g.mean == 0.0 and g.std == 0.0

    def test_hand_computed_mean_and_sample_std(self):
        method = {1: 0.71, 2: 0.72, 3: 0.73}
        base = {1: 0.70, 2: 0.70, 3: 0.70}
        g = relative_gains(method, base)
        assert g.mean == pytest.approx(2.0)
        assert g.std == pytest.approx(1.0)

    def test_single_seed_flagged(self):
        g = relative_gains({45: 0.75}, {45: 0.70})
        assert g.mean == pytest.approx(5.0)
        assert g.std == 0.0
        assert not g.std_defined
        assert "undefined" in g.format()

    def test_mismatched_seed_sets_rejected(self):
        with pytest.raises(MetricError, match="seed sets differ"):
            relative_gains({45: 0.7}, {46: 0.7})
