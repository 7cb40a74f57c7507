"""Ranking metrics and the per-seed paired-gain protocol.

The headline metric is average precision (area under the precision-recall
curve without interpolation), computed per relation and macro-averaged.
Method comparisons are paired by seed: the gain of a method at one seed is
the difference between its score and the no-distillation baseline's score
at the same seed, in points of 100-scaled average precision. Pairing
removes the large seed-to-seed variation in task difficulty, which would
otherwise swamp the method effect.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MetricError


def auprc(scores, labels) -> float:
    """Average precision of a ranking, in [0, 1].

    Items are ranked by descending score. For a group of tied scores the
    precision credited to its positives is the expectation over a uniformly
    random ordering of the group, which makes the result independent of
    input order. With distinct scores this reduces to the plain sum of
    precision-at-rank over positives divided by the number of positives.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise MetricError("scores and labels must be equal-length 1-d arrays")
    if not np.isfinite(scores).all():
        raise MetricError("scores must be finite")
    n_pos = int(np.sum(labels == 1))
    n_neg = int(np.sum(labels == 0))
    if n_pos + n_neg != len(labels):
        raise MetricError("labels must be 0 or 1")
    if n_pos == 0 or n_neg == 0:
        raise MetricError("need at least one positive and one negative label")

    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    y = labels[order]

    ap_sum = 0.0
    tp_before = 0
    n_before = 0
    i = 0
    n = len(s)
    while i < n:
        j = i + 1
        while j < n and s[j] == s[i]:
            j += 1
        g = j - i
        gp = int(np.sum(y[i:j]))
        if g == 1:
            if gp:
                ap_sum += (tp_before + 1) / (n_before + 1)
        elif gp:
            # E[precision at the r-th slot of the group | that slot is a
            # positive], with positives exchangeable within the group.
            for r in range(1, g + 1):
                expected_tp = tp_before + 1 + (r - 1) * (gp - 1) / (g - 1)
                ap_sum += (gp / g) * expected_tp / (n_before + r)
        tp_before += gp
        n_before += g
        i = j
    return ap_sum / n_pos


def macro_auprc(per_relation: dict[str, tuple]) -> float:
    """Unweighted mean of per-relation average precision."""
    if not per_relation:
        raise MetricError("no relations to average")
    values = [auprc(scores, labels) for scores, labels in per_relation.values()]
    return float(np.mean(values))


@dataclass
class GainSummary:
    mean: float
    std: float
    n_seeds: int
    std_defined: bool
    per_seed: dict[int, float]

    def format(self):
        suffix = "" if self.std_defined else " (single seed; std undefined)"
        return f"{self.mean:+.2f}±{self.std:.2f}{suffix}"


def relative_gains(method_scores: dict[int, float], baseline_scores: dict[int, float]) -> GainSummary:
    """Mean and sample std of per-seed differences, in 100-scaled points."""
    if set(method_scores) != set(baseline_scores):
        raise MetricError(
            f"seed sets differ: {sorted(method_scores)} vs {sorted(baseline_scores)}"
        )
    if not method_scores:
        raise MetricError("no seeds to compare")
    seeds = sorted(method_scores)
    gains = {s: 100.0 * (method_scores[s] - baseline_scores[s]) for s in seeds}
    values = np.array([gains[s] for s in seeds])
    if len(values) > 1:
        return GainSummary(float(values.mean()), float(values.std(ddof=1)), len(values), True, gains)
    return GainSummary(float(values[0]), 0.0, 1, False, gains)
