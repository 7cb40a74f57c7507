import numpy as np
import pytest

from kgdistill.graph import HeteroGraph, LabeledEdgeSet, Relation, TripleSet


@pytest.fixture
def two_type_graph():
    """3 'a' nodes, 4 'b' nodes, one cross relation and one self relation."""
    return HeteroGraph(
        {"a": 3, "b": 4},
        [Relation("r1", "a", "b"), Relation("r2", "b", "b")],
        {
            "r1": (np.array([0, 1, 2, 0]), np.array([1, 2, 3, 0])),
            "r2": (np.array([0, 3]), np.array([1, 1])),
        },
    )


@pytest.fixture
def tiny_graph():
    """Single relation a->b with two edges."""
    return HeteroGraph(
        {"a": 2, "b": 2},
        [Relation("r", "a", "b")],
        {"r": (np.array([0, 1]), np.array([0, 1]))},
    )


def make_positives(graph, rel_names=None):
    triples = graph.triples(rel_names)
    return LabeledEdgeSet(triples, np.ones(len(triples)), "ground-truth")


def degree_prescribed_graph(src_degrees, n_dst=3):
    """One relation whose src-side degree vector equals src_degrees exactly
    (parallel edges to arbitrary dst nodes)."""
    src = np.repeat(np.arange(len(src_degrees)), src_degrees)
    dst = np.arange(len(src)) % n_dst
    return HeteroGraph(
        {"u": len(src_degrees), "v": n_dst},
        [Relation("r", "u", "v")],
        {"r": (src.astype(np.int64), dst.astype(np.int64))},
    )
