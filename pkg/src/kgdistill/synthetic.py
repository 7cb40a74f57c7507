"""Synthetic knowledge-graph generator for desk-scale experiments.

Edges are drawn from a planted trilinear (DistMult-style) model: each node
gets a latent vector and a heavy-tailed (lognormal) popularity scale, each
relation gets a latent vector, and the probability of edge (r, u, v) is

    clip(c * w_u * w_v * sigmoid(score(u, r, v)), 0, 1)

with c chosen per relation so the mean pre-clip probability equals the
requested density. The sigmoid factor carries structure a trilinear decoder
of width >= latent_dim can learn (so trained models beat random ranking);
the w_u * w_v factor makes degrees deliberately non-uniform, giving
degree-weighted sampling something to chew on. A constant-rescaled sigmoid
alone cannot do the latter: with centered latents its per-node expectation
is flat, capping every node's expected degree near the mean.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .graph import HeteroGraph, Relation

MIN_EXPECTED_EDGES = 10.0


@dataclass
class SyntheticFactors:
    """Planted latent factors plus per-relation draw statistics.

    expected_edges / edge_count_var describe the Bernoulli matrix actually
    sampled from (after density rescaling and clipping), so realized edge
    counts can be checked against a binomial bound.
    """

    latent_dim: int
    density: float
    node_factors: dict[str, np.ndarray]
    node_scales: dict[str, np.ndarray]
    rel_factors: dict[str, np.ndarray]
    prob_scale: dict[str, float] = field(default_factory=dict)
    expected_edges: dict[str, float] = field(default_factory=dict)
    edge_count_var: dict[str, float] = field(default_factory=dict)

    def probability_matrix(self, graph: HeteroGraph, rel_name: str) -> np.ndarray:
        rel = graph.relation(rel_name)
        zu = self.node_factors[rel.src_type]
        zv = self.node_factors[rel.dst_type]
        zr = self.rel_factors[rel_name]
        wu = self.node_scales[rel.src_type]
        wv = self.node_scales[rel.dst_type]
        raw = 1.0 / (1.0 + np.exp(-np.einsum("id,d,jd->ij", zu, zr, zv)))
        raw *= np.outer(wu, wv)
        return np.clip(raw * self.prob_scale[rel_name], 0.0, 1.0)


def _relation_endpoints(type_names, n_relations):
    """Deterministic cross-type endpoint assignment, cycling ordered pairs."""
    if len(type_names) == 1:
        return [(type_names[0], type_names[0])] * n_relations
    pairs = []
    t = len(type_names)
    for offset in range(1, t):
        for i in range(t):
            pairs.append((type_names[i], type_names[(i + offset) % t]))
    return [pairs[i % len(pairs)] for i in range(n_relations)]


def generate_synthetic_kg(
    n_types: int,
    n_relations: int,
    nodes_per_type: int,
    latent_dim: int,
    density: float,
    seed: int,
) -> tuple[HeteroGraph, SyntheticFactors]:
    if min(n_types, n_relations, nodes_per_type, latent_dim) < 1:
        raise ConfigError("all synthetic-KG counts must be >= 1")
    if not (0.0 < density < 1.0):
        raise ConfigError("density must lie in (0, 1)")
    if density * nodes_per_type * nodes_per_type < MIN_EXPECTED_EDGES:
        raise ConfigError(
            f"density {density} yields < {MIN_EXPECTED_EDGES:.0f} expected edges per relation"
        )

    root = np.random.SeedSequence(entropy=int(seed))
    streams = [np.random.default_rng(s) for s in root.spawn(2 + n_relations)]
    node_rng, rel_rng = streams[0], streams[1]

    type_names = [f"t{i}" for i in range(n_types)]
    node_factors = {}
    node_scales = {}
    for t in type_names:
        base = node_rng.standard_normal((nodes_per_type, latent_dim))
        node_factors[t] = base / latent_dim**0.25
        node_scales[t] = node_rng.lognormal(mean=0.0, sigma=0.75, size=nodes_per_type)

    endpoints = _relation_endpoints(type_names, n_relations)
    relations = [Relation(f"rel{i}", a, b) for i, (a, b) in enumerate(endpoints)]
    rel_factors = {r.name: rel_rng.standard_normal(latent_dim) for r in relations}

    factors = SyntheticFactors(
        latent_dim=latent_dim,
        density=density,
        node_factors=node_factors,
        node_scales=node_scales,
        rel_factors=rel_factors,
    )

    edges = {}
    for i, rel in enumerate(relations):
        zu = node_factors[rel.src_type]
        zv = node_factors[rel.dst_type]
        raw = 1.0 / (1.0 + np.exp(-np.einsum("id,d,jd->ij", zu, rel_factors[rel.name], zv)))
        raw *= np.outer(node_scales[rel.src_type], node_scales[rel.dst_type])
        scale = density / raw.mean()
        probs = np.clip(raw * scale, 0.0, 1.0)
        factors.prob_scale[rel.name] = float(scale)
        factors.expected_edges[rel.name] = float(probs.sum())
        factors.edge_count_var[rel.name] = float((probs * (1.0 - probs)).sum())
        hit = streams[2 + i].random(probs.shape) < probs
        src, dst = np.nonzero(hit)
        edges[rel.name] = (src.astype(np.int64), dst.astype(np.int64))

    graph = HeteroGraph({t: nodes_per_type for t in type_names}, relations, edges)
    return graph, factors
