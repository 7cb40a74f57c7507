"""Degree-aware random-graph generation and teacher soft-labeling.

The random-graph generator draws, per relation, k source and k destination
indices independently with replacement, each endpoint weighted by
degree^power over its node type (power 1.0 by default; 1.5 sharpens the
distribution toward hubs). The draws are stacked positionally into k edges;
duplicates and self-pairings are kept, since deduplication would bias the
edge distribution toward low-degree pairs.

Teacher labels always come from encoding the original train graph - the
random graph only decides WHERE the teacher's scores are read out, never
what the teacher sees. Regenerating the edge set (and its labels) in place
each epoch keeps the live label count bounded by k per relation no matter
how many epochs run; the cumulative number of distinct draws is unbounded.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SamplingError
from .graph import HeteroGraph, LabeledEdgeSet, TripleSet
from .model import ModelParams, distmult_score, encode, sigmoid

SOFT_TARGET_EPS = 1e-12


@dataclass
class RandomGraphSpec:
    k: int = 1000
    power: float = 1.0
    regenerate_every: int = 1  # 0 = draw once and reuse for the whole run
    strong_score_threshold: float | None = None
    two_sided_threshold: bool = False
    relations: list[str] | None = None  # None = caller supplies target relations

    def validate(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.power <= 0:
            raise ValueError("power must be positive")
        if self.regenerate_every < 0:
            raise ValueError("regenerate_every must be >= 0")

    def to_dict(self):
        return {
            "k": self.k,
            "power": self.power,
            "regenerate_every": self.regenerate_every,
            "strong_score_threshold": self.strong_score_threshold,
            "two_sided_threshold": self.two_sided_threshold,
            "relations": list(self.relations) if self.relations is not None else None,
        }

    @staticmethod
    def from_dict(d):
        spec = RandomGraphSpec(
            k=int(d.get("k", 1000)),
            power=float(d.get("power", 1.0)),
            regenerate_every=int(d.get("regenerate_every", 1)),
            strong_score_threshold=(
                None
                if d.get("strong_score_threshold") is None
                else float(d["strong_score_threshold"])
            ),
            two_sided_threshold=bool(d.get("two_sided_threshold", False)),
            relations=list(d["relations"]) if d.get("relations") else None,
        )
        spec.validate()
        return spec


def degree_weights(graph: HeteroGraph, rel_name: str, side: str, power: float) -> np.ndarray:
    """Normalized sampling weights degree^power / sum over one endpoint side."""
    deg = graph.degree_src(rel_name) if side == "src" else graph.degree_dst(rel_name)
    deg = deg.astype(np.float64)
    total = deg.sum()
    if total == 0:
        raise SamplingError(f"relation {rel_name!r}: all-zero {side} degree vector")
    w = deg**power
    return w / w.sum()


def generate_random_graph(
    graph: HeteroGraph, spec: RandomGraphSpec, rng: np.random.Generator
) -> TripleSet:
    spec.validate()
    rel_names = spec.relations
    if rel_names is None:
        rel_names = [r.name for r in graph.relations]
    parts = []
    for name in rel_names:
        p_src = degree_weights(graph, name, "src", spec.power)
        p_dst = degree_weights(graph, name, "dst", spec.power)
        src = rng.choice(len(p_src), size=spec.k, replace=True, p=p_src)
        dst = rng.choice(len(p_dst), size=spec.k, replace=True, p=p_dst)
        rid = np.full(spec.k, graph.rel_index[name], dtype=np.int64)
        parts.append(TripleSet(rid, src, dst))
    return TripleSet.concat(parts)


def teacher_pseudo_labels(
    teacher: ModelParams,
    graph: HeteroGraph,
    triples: TripleSet,
    threshold: float | None = None,
    two_sided: bool = False,
    teacher_embeddings: dict[str, np.ndarray] | None = None,
) -> LabeledEdgeSet:
    """Teacher soft targets (sigmoid of decoder logits) for the given triples.

    teacher_embeddings, when supplied, must be the teacher's encoding of the
    original train graph; otherwise it is computed here from `graph`. With a
    threshold, only confidently positive entries survive (or confidently
    scored either way when two_sided).
    """
    h = teacher_embeddings if teacher_embeddings is not None else encode(teacher, graph)
    logits = distmult_score(h, triples, teacher.rel_embed, graph)
    if threshold is not None:
        keep = np.abs(logits) > threshold if two_sided else logits > threshold
        triples = TripleSet(triples.rel_ids[keep], triples.src[keep], triples.dst[keep])
        logits = logits[keep]
    targets = np.clip(sigmoid(logits), SOFT_TARGET_EPS, 1.0 - SOFT_TARGET_EPS)
    return LabeledEdgeSet(triples, targets, "teacher-soft")


@dataclass
class PseudoLabelBudget:
    """Instrumented accounting for the on-the-fly label flow.

    live counts labels currently held; cumulative counts every draw ever
    generated. peak_live is the high-water mark, which stays bounded by
    k * |relations| (+ any fixed train-graph label set tracked separately)
    regardless of epoch count.
    """

    live: int = 0
    peak_live: int = 0
    cumulative_generated: int = 0
    regenerations: int = 0
    live_history: list[int] = field(default_factory=list)

    def record(self, n_drawn: int, n_live: int):
        self.cumulative_generated += n_drawn
        self.live = n_live
        self.peak_live = max(self.peak_live, n_live)
        self.regenerations += 1

    def observe_epoch(self):
        self.live_history.append(self.live)


class EpochLabelCache:
    """Serves the per-epoch random-graph label set per the regeneration policy.

    regenerate_every = m >= 1 draws a fresh random graph whenever
    epoch % m == 0 (every epoch when m = 1); m = 0 draws once at the first
    request and reuses that set forever. Only one label set is ever alive.
    """

    def __init__(self, teacher, graph, spec: RandomGraphSpec, rng, teacher_embeddings=None):
        spec.validate()
        self.teacher = teacher
        self.graph = graph
        self.spec = spec
        self.rng = rng
        self.teacher_embeddings = (
            teacher_embeddings if teacher_embeddings is not None else encode(teacher, graph)
        )
        self.budget = PseudoLabelBudget()
        self._labels: LabeledEdgeSet | None = None
        self._generated_at: int | None = None

    def labels_for_epoch(self, epoch: int) -> LabeledEdgeSet:
        if epoch < 0:
            raise ValueError("epoch must be >= 0")
        m = self.spec.regenerate_every
        fresh = self._labels is None or (
            m >= 1 and epoch % m == 0 and self._generated_at != epoch
        )
        if fresh:
            triples = generate_random_graph(self.graph, self.spec, self.rng)
            n_drawn = len(triples)
            self._labels = teacher_pseudo_labels(
                self.teacher,
                self.graph,
                triples,
                threshold=self.spec.strong_score_threshold,
                two_sided=self.spec.two_sided_threshold,
                teacher_embeddings=self.teacher_embeddings,
            )
            self._generated_at = epoch
            self.budget.record(n_drawn, len(self._labels))
        return self._labels


def epoch_random_labels(
    teacher, graph, spec: RandomGraphSpec, epoch: int, cache: EpochLabelCache | None = None, rng=None
) -> tuple[LabeledEdgeSet, EpochLabelCache]:
    """Functional wrapper over EpochLabelCache for one-off use."""
    if cache is None:
        if rng is None:
            raise ValueError("first call needs an rng to seed the cache")
        cache = EpochLabelCache(teacher, graph, spec, rng)
    return cache.labels_for_epoch(epoch), cache
