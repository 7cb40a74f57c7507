"""Heterogeneous knowledge-graph data model and edge-list ingestion.

A graph is a set of typed node blocks plus per-relation directed edge
arrays. There are no node or edge features: the only trainable inputs are
the node type, the edge type, and adjacency. Degree tables are computed at
construction and kept per relation per endpoint side; duplicate edges are
retained and counted (deduplication would silently reshape the sampling
distribution used by the degree-weighted random-graph generator).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GraphFormatError

EDGE_KINDS = ("ground-truth", "negative", "teacher-soft")


@dataclass(frozen=True)
class Relation:
    name: str
    src_type: str
    dst_type: str


@dataclass
class LoadSummary:
    rows_total: int = 0
    edges_loaded: int = 0
    rows_rejected: int = 0


@dataclass
class TripleSet:
    """Parallel arrays of (relation id, src index, dst index)."""

    rel_ids: np.ndarray
    src: np.ndarray
    dst: np.ndarray

    def __post_init__(self):
        self.rel_ids = np.asarray(self.rel_ids, dtype=np.int64)
        self.src = np.asarray(self.src, dtype=np.int64)
        self.dst = np.asarray(self.dst, dtype=np.int64)
        if not (len(self.rel_ids) == len(self.src) == len(self.dst)):
            raise ValueError("triple arrays must have equal length")

    def __len__(self):
        return len(self.rel_ids)

    @staticmethod
    def concat(parts: list["TripleSet"]) -> "TripleSet":
        return TripleSet(
            np.concatenate([p.rel_ids for p in parts]) if parts else np.empty(0, np.int64),
            np.concatenate([p.src for p in parts]) if parts else np.empty(0, np.int64),
            np.concatenate([p.dst for p in parts]) if parts else np.empty(0, np.int64),
        )


@dataclass
class LabeledEdgeSet:
    """Triples with a real-valued training target.

    kind discriminates the three label families: observed positives
    (target exactly 1.0), sampled negatives (target exactly 0.0), and
    teacher-produced soft labels (targets strictly inside (0, 1)).
    `collisions` counts negative corruptions that were accepted even
    though they reproduce a known positive (after retries ran out).
    """

    triples: TripleSet
    targets: np.ndarray
    kind: str
    collisions: int = 0

    def __post_init__(self):
        self.targets = np.asarray(self.targets, dtype=np.float64)
        if len(self.targets) != len(self.triples):
            raise ValueError("targets length must match triples")
        if self.kind not in EDGE_KINDS:
            raise ValueError(f"unknown label kind {self.kind!r}")
        if self.kind == "ground-truth" and not np.all(self.targets == 1.0):
            raise ValueError("ground-truth targets must all be 1.0")
        if self.kind == "negative" and not np.all(self.targets == 0.0):
            raise ValueError("negative targets must all be 0.0")
        if self.kind == "teacher-soft" and len(self.targets) and not (
            np.all(self.targets > 0.0) and np.all(self.targets < 1.0)
        ):
            raise ValueError("teacher-soft targets must lie in (0, 1)")

    def __len__(self):
        return len(self.triples)


class HeteroGraph:
    """Immutable typed graph with per-relation, per-side degree tables.

    edges maps relation name -> (src, dst) int64 arrays of equal length.
    Node indices are contiguous and 0-based within each node type.
    """

    def __init__(self, node_counts, relations, edges, id_maps=None, load_summary=None):
        self.node_counts: dict[str, int] = dict(node_counts)
        self.relations: list[Relation] = list(relations)
        names = [r.name for r in self.relations]
        if len(set(names)) != len(names):
            raise ValueError("duplicate relation names")
        self.rel_index: dict[str, int] = {r.name: i for i, r in enumerate(self.relations)}
        self.id_maps = id_maps
        self.load_summary = load_summary

        self.edges: dict[str, tuple[np.ndarray, np.ndarray]] = {}
        self._deg_src: dict[str, np.ndarray] = {}
        self._deg_dst: dict[str, np.ndarray] = {}
        for rel in self.relations:
            src, dst = edges.get(rel.name, (np.empty(0, np.int64), np.empty(0, np.int64)))
            src = np.ascontiguousarray(src, dtype=np.int64)
            dst = np.ascontiguousarray(dst, dtype=np.int64)
            if len(src) != len(dst):
                raise ValueError(f"relation {rel.name}: src/dst length mismatch")
            n_src = self.node_counts[rel.src_type]
            n_dst = self.node_counts[rel.dst_type]
            if len(src) and (src.min() < 0 or src.max() >= n_src):
                raise ValueError(f"relation {rel.name}: src index out of range")
            if len(dst) and (dst.min() < 0 or dst.max() >= n_dst):
                raise ValueError(f"relation {rel.name}: dst index out of range")
            src.flags.writeable = False
            dst.flags.writeable = False
            self.edges[rel.name] = (src, dst)
            self._deg_src[rel.name] = np.bincount(src, minlength=n_src).astype(np.int64)
            self._deg_dst[rel.name] = np.bincount(dst, minlength=n_dst).astype(np.int64)
            self._deg_src[rel.name].flags.writeable = False
            self._deg_dst[rel.name].flags.writeable = False

    # -- accessors ---------------------------------------------------------

    def relation(self, name: str) -> Relation:
        return self.relations[self.rel_index[name]]

    def n_edges(self, name: str) -> int:
        return len(self.edges[name][0])

    def total_edges(self) -> int:
        return sum(self.n_edges(r.name) for r in self.relations)

    def degree_src(self, name: str) -> np.ndarray:
        """Occurrences of each src-type node as the source of this relation."""
        return self._deg_src[name]

    def degree_dst(self, name: str) -> np.ndarray:
        return self._deg_dst[name]

    def endpoint_degrees(self, name: str) -> dict[str, np.ndarray]:
        """Per node type, how often each node occurs as an endpoint.

        For a self-relation (src type == dst type) both sides are summed,
        so the values over all types always total 2x the edge count.
        """
        rel = self.relation(name)
        if rel.src_type == rel.dst_type:
            return {rel.src_type: self._deg_src[name] + self._deg_dst[name]}
        return {rel.src_type: self._deg_src[name], rel.dst_type: self._deg_dst[name]}

    def triples(self, names=None) -> TripleSet:
        """All edges of the given relations (default: all) as one TripleSet."""
        if names is None:
            names = [r.name for r in self.relations]
        parts = []
        for name in names:
            src, dst = self.edges[name]
            rid = np.full(len(src), self.rel_index[name], dtype=np.int64)
            parts.append(TripleSet(rid, src, dst))
        return TripleSet.concat(parts)

    def with_edges(self, edges) -> "HeteroGraph":
        """Same node blocks and relation descriptors, different edge arrays."""
        return HeteroGraph(self.node_counts, self.relations, edges, id_maps=self.id_maps)

    def node_label(self, node_type: str, index: int) -> str:
        """String id for a node, falling back to the index when unmapped."""
        if self.id_maps and node_type in self.id_maps:
            return self.id_maps[node_type][index]
        return str(index)


# -- edge-list file format --------------------------------------------------
# UTF-8, tab-separated, five columns, no header:
#   src_type  src_id  relation  dst_type  dst_id
# Lines starting with '#' are comments. A relation name binds to the
# (src_type, dst_type) pair of its first occurrence.


def load_graph(path, schema=None) -> HeteroGraph:
    """Parse an edge-list file into a HeteroGraph.

    schema, when given, is a whitelist of relation names; rows with other
    relations are counted in the load summary rather than failing.
    """
    summary = LoadSummary()
    id_to_index: dict[str, dict[str, int]] = {}
    rel_types: dict[str, tuple[str, str]] = {}
    rel_rows: dict[str, tuple[list, list]] = {}

    def intern(node_type, node_id):
        table = id_to_index.setdefault(node_type, {})
        if node_id not in table:
            table[node_id] = len(table)
        return table[node_id]

    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            summary.rows_total += 1
            parts = line.split("\t")
            if len(parts) != 5:
                raise GraphFormatError(
                    f"expected 5 tab-separated columns, got {len(parts)}", line_no
                )
            src_type, src_id, rel_name, dst_type, dst_id = parts
            if not all(parts):
                raise GraphFormatError("empty column", line_no)
            if schema is not None and rel_name not in schema:
                summary.rows_rejected += 1
                continue
            if rel_name in rel_types:
                if rel_types[rel_name] != (src_type, dst_type):
                    raise GraphFormatError(
                        f"relation {rel_name!r} redeclared with endpoint types "
                        f"({src_type}, {dst_type}), expected {rel_types[rel_name]}",
                        line_no,
                    )
            else:
                rel_types[rel_name] = (src_type, dst_type)
                rel_rows[rel_name] = ([], [])
            s = intern(src_type, src_id)
            d = intern(dst_type, dst_id)
            rel_rows[rel_name][0].append(s)
            rel_rows[rel_name][1].append(d)
            summary.edges_loaded += 1

    if summary.edges_loaded == 0:
        raise GraphFormatError("no edges")

    node_counts = {t: len(m) for t, m in id_to_index.items()}
    relations = [Relation(n, *rel_types[n]) for n in rel_rows]
    edges = {
        n: (np.asarray(s, dtype=np.int64), np.asarray(d, dtype=np.int64))
        for n, (s, d) in rel_rows.items()
    }
    id_maps = {t: {i: s for s, i in m.items()} for t, m in id_to_index.items()}
    return HeteroGraph(node_counts, relations, edges, id_maps=id_maps, load_summary=summary)


def write_edge_list(graph: HeteroGraph, path, header_comment=None):
    """Write all edges in the 5-column format (round-trips via load_graph)."""
    with open(path, "w", encoding="utf-8") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        for rel in graph.relations:
            src, dst = graph.edges[rel.name]
            for s, d in zip(src.tolist(), dst.tolist()):
                fh.write(
                    f"{rel.src_type}\t{graph.node_label(rel.src_type, s)}\t{rel.name}\t"
                    f"{rel.dst_type}\t{graph.node_label(rel.dst_type, d)}\n"
                )


def dump_labeled_edges(graph: HeteroGraph, labels: LabeledEdgeSet, path):
    """Debug dump: the 5-column edge format plus a 6th soft-target column."""
    with open(path, "w", encoding="utf-8") as fh:
        for k in range(len(labels)):
            rel = graph.relations[int(labels.triples.rel_ids[k])]
            s = int(labels.triples.src[k])
            d = int(labels.triples.dst[k])
            fh.write(
                f"{rel.src_type}\t{graph.node_label(rel.src_type, s)}\t{rel.name}\t"
                f"{rel.dst_type}\t{graph.node_label(rel.dst_type, d)}\t"
                f"{float(labels.targets[k])!r}\n"
            )
