"""Train/validation/test splitting and 1:1 negative sampling.

Two split modes:

* edge-random: target-relation edges are partitioned by the given
  fractions; every non-target edge stays in train. Duplicate triples are
  assigned as a unit so no triple can straddle two splits.
* node-holdout: a fraction of the dst-side nodes that carry target edges
  is held out per target relation; all of a held-out node's edges in that
  relation go to valid or test, none to train. This approximates zero-shot
  evaluation where test entities have never been seen with the target
  relation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SplitError
from .graph import HeteroGraph, LabeledEdgeSet, TripleSet
from .rng import rng_stream

MIN_TARGET_EDGES = 10

SPLIT_MODES = ("edge-random", "node-holdout")


@dataclass
class SplitSpec:
    mode: str = "edge-random"
    fractions: tuple[float, float, float] = (0.8, 0.1, 0.1)
    target_relations: list[str] = field(default_factory=list)
    seed: int = 0

    def validate(self, graph: HeteroGraph):
        if self.mode not in SPLIT_MODES:
            raise SplitError(f"unknown split mode {self.mode!r}")
        f = tuple(self.fractions)
        if len(f) != 3 or any(x <= 0 for x in f):
            raise SplitError("fractions must be three strictly positive reals")
        if abs(sum(f) - 1.0) > 1e-9:
            raise SplitError(f"fractions must sum to 1, got {sum(f)!r}")
        if not self.target_relations:
            raise SplitError("target_relations must be non-empty")
        known = {r.name for r in graph.relations}
        missing = [n for n in self.target_relations if n not in known]
        if missing:
            raise SplitError(f"target relations not in graph: {missing}")

    def to_dict(self):
        return {
            "mode": self.mode,
            "fractions": list(self.fractions),
            "target_relations": list(self.target_relations),
            "seed": self.seed,
        }

    @staticmethod
    def from_dict(d):
        spec = SplitSpec(
            mode=d.get("mode", "edge-random"),
            fractions=tuple(d.get("fractions", (0.8, 0.1, 0.1))),
            target_relations=list(d.get("target_relations", [])),
            seed=int(d.get("seed", 0)),
        )
        return spec


@dataclass
class SplitResult:
    train: HeteroGraph
    valid: LabeledEdgeSet
    test: LabeledEdgeSet
    spec: SplitSpec


def _cut_points(n, fractions):
    a = int(round(fractions[0] * n))
    b = int(round((fractions[0] + fractions[1]) * n))
    return a, b


def _ground_truth(graph, rel_rows):
    parts = []
    for rel_name, (src, dst) in rel_rows.items():
        rid = np.full(len(src), graph.rel_index[rel_name], dtype=np.int64)
        parts.append(TripleSet(rid, np.asarray(src), np.asarray(dst)))
    triples = TripleSet.concat(parts)
    return LabeledEdgeSet(triples, np.ones(len(triples)), "ground-truth")


def split(graph: HeteroGraph, spec: SplitSpec) -> SplitResult:
    """Partition target-relation edges into train graph + valid/test label sets."""
    spec.validate(graph)
    for name in spec.target_relations:
        if graph.n_edges(name) < MIN_TARGET_EDGES:
            raise SplitError(
                f"target relation {name!r} has {graph.n_edges(name)} edges; "
                f"need >= {MIN_TARGET_EDGES}"
            )

    rng = rng_stream(spec.seed, "split")
    train_edges = {}
    valid_rows, test_rows = {}, {}
    targets = set(spec.target_relations)

    for rel in graph.relations:
        src, dst = graph.edges[rel.name]
        if rel.name not in targets:
            train_edges[rel.name] = (src, dst)
            continue

        if spec.mode == "edge-random":
            pairs = np.stack([src, dst], axis=1)
            uniq, inverse = np.unique(pairs, axis=0, return_inverse=True)
            order = rng.permutation(len(uniq))
            a, b = _cut_points(len(uniq), spec.fractions)
            bucket_of_unique = np.empty(len(uniq), dtype=np.int64)
            bucket_of_unique[order[:a]] = 0
            bucket_of_unique[order[a:b]] = 1
            bucket_of_unique[order[b:]] = 2
            edge_bucket = bucket_of_unique[inverse]
            keep = edge_bucket == 0
            train_edges[rel.name] = (src[keep], dst[keep])
            valid_rows[rel.name] = tuple(uniq[bucket_of_unique == 1].T)
            test_rows[rel.name] = tuple(uniq[bucket_of_unique == 2].T)
        else:  # node-holdout
            dst_nodes = np.unique(dst)
            order = rng.permutation(len(dst_nodes))
            f_tr, f_va, f_te = spec.fractions
            n_hold = int(round((f_va + f_te) * len(dst_nodes)))
            n_valid = int(round(f_va / (f_va + f_te) * n_hold))
            valid_nodes = dst_nodes[order[:n_valid]]
            test_nodes = dst_nodes[order[n_valid:n_hold]]
            in_valid = np.isin(dst, valid_nodes)
            in_test = np.isin(dst, test_nodes)
            keep = ~(in_valid | in_test)
            train_edges[rel.name] = (src[keep], dst[keep])
            vp = np.unique(np.stack([src[in_valid], dst[in_valid]], axis=1), axis=0)
            tp = np.unique(np.stack([src[in_test], dst[in_test]], axis=1), axis=0)
            valid_rows[rel.name] = (vp[:, 0], vp[:, 1])
            test_rows[rel.name] = (tp[:, 0], tp[:, 1])

        if len(train_edges[rel.name][0]) == 0:
            raise SplitError(f"split would leave no train edges for target {rel.name!r}")

    train = graph.with_edges(train_edges)
    return SplitResult(train, _ground_truth(graph, valid_rows), _ground_truth(graph, test_rows), spec)


# -- negative sampling -------------------------------------------------------


def _triple_keys(rel_ids, src, dst, max_nodes):
    return (rel_ids * max_nodes + src) * max_nodes + dst


def known_positive_keys(graph: HeteroGraph, positives: LabeledEdgeSet) -> np.ndarray:
    """Sorted key array of every known positive triple, for corruption rejection."""
    max_nodes = np.int64(max(graph.node_counts.values()))
    known = TripleSet.concat([graph.triples(), positives.triples])
    return np.unique(_triple_keys(known.rel_ids, known.src, known.dst, max_nodes))


def sample_negatives(
    graph: HeteroGraph,
    positives: LabeledEdgeSet,
    rng: np.random.Generator,
    max_retries: int = 100,
    known_keys: np.ndarray | None = None,
    corrupt: str = "dst",
) -> LabeledEdgeSet:
    """Corrupt one endpoint of each positive uniformly over its node type.

    The dst side is corrupted by default (target relations are scored from
    the dst list); corrupt="src" flips the side. Corruptions that reproduce
    a known positive (an edge of the graph or a member of `positives`) are
    redrawn up to `max_retries` times; when the retries run out the
    collision is accepted and counted, so the output always has exactly one
    negative per positive. Callers drawing against a fixed
    (graph, positives) pair repeatedly can precompute known_keys via
    known_positive_keys.
    """
    if len(positives) == 0:
        raise ValueError("positives must be non-empty")
    if corrupt not in ("dst", "src"):
        raise ValueError('corrupt must be "dst" or "src"')

    rel_ids = positives.triples.rel_ids
    type_of = [r.dst_type if corrupt == "dst" else r.src_type for r in graph.relations]
    n_nodes_by_rel = np.array([graph.node_counts[t] for t in type_of], dtype=np.int64)
    fixed = (positives.triples.src if corrupt == "dst" else positives.triples.dst).copy()
    max_nodes = np.int64(max(graph.node_counts.values()))

    if known_keys is None:
        known_keys = known_positive_keys(graph, positives)

    n = len(positives)
    drawn = np.empty(n, dtype=np.int64)
    pending = np.arange(n)
    for _attempt in range(max_retries):
        draw = rng.integers(0, n_nodes_by_rel[rel_ids[pending]], dtype=np.int64)
        drawn[pending] = draw
        if corrupt == "dst":
            keys = _triple_keys(rel_ids[pending], fixed[pending], draw, max_nodes)
        else:
            keys = _triple_keys(rel_ids[pending], draw, fixed[pending], max_nodes)
        hit = np.searchsorted(known_keys, keys)
        hit = (hit < len(known_keys)) & (known_keys[np.minimum(hit, len(known_keys) - 1)] == keys)
        pending = pending[hit]
        if len(pending) == 0:
            break
    collisions = len(pending)

    src, dst = (fixed, drawn) if corrupt == "dst" else (drawn, fixed)
    return LabeledEdgeSet(
        TripleSet(rel_ids.copy(), src, dst),
        np.zeros(n),
        "negative",
        collisions=collisions,
    )


def write_split_manifest(graph: HeteroGraph, labels: LabeledEdgeSet, path):
    """Audit file: one held-out triple per line in the 5-column edge format."""
    with open(path, "w", encoding="utf-8") as fh:
        for k in range(len(labels)):
            rel = graph.relations[int(labels.triples.rel_ids[k])]
            s = int(labels.triples.src[k])
            d = int(labels.triples.dst[k])
            fh.write(
                f"{rel.src_type}\t{graph.node_label(rel.src_type, s)}\t{rel.name}\t"
                f"{rel.dst_type}\t{graph.node_label(rel.dst_type, d)}\n"
            )
