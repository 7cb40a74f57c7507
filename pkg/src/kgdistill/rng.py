"""Deterministic, purpose-tagged random streams.

Every stochastic component draws from its own stream derived from
(seed, tag). Two runs that share a seed consume identical streams per
purpose, so adding or removing one stochastic feature (say, random-graph
generation) never shifts the draws seen by another (say, negative
sampling). That pairing is what makes per-seed method comparisons fair.
"""

from __future__ import annotations

import zlib

import numpy as np


def rng_stream(seed: int, tag: str) -> np.random.Generator:
    """Return a fresh Generator for (seed, tag), independent of other tags."""
    key = zlib.crc32(tag.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(key,)))
