"""Versioned textual checkpoints for model parameters.

JSON container holding the training config, every parameter tensor, and the
string-id mapping of the graph the model was trained on. Python's float
repr (used by json) is shortest-roundtrip, so the textual form round-trips
float64 tensors bit-exactly as long as values are finite, which the
training invariants guarantee.
"""

from __future__ import annotations

import json

import numpy as np

from .model import ModelParams, TrainConfig

FORMAT_VERSION = 1


def _tensor_out(a: np.ndarray):
    return {"shape": list(a.shape), "data": a.ravel().tolist()}


def _tensor_in(d) -> np.ndarray:
    return np.array(d["data"], dtype=np.float64).reshape(d["shape"])


def save_checkpoint(path, params: ModelParams, config: TrainConfig | None = None, id_maps=None, extra=None):
    payload = {
        "format_version": FORMAT_VERSION,
        "config": config.to_dict() if config else None,
        "id_maps": (
            {t: {str(i): s for i, s in m.items()} for t, m in id_maps.items()} if id_maps else None
        ),
        "extra": extra,
        "dim": params.dim,
        "node_embed": {t: _tensor_out(a) for t, a in params.node_embed.items()},
        "rel_embed": {r: _tensor_out(a) for r, a in params.rel_embed.items()},
        "layer_weights": [
            {k: _tensor_out(a) for k, a in layer.items()} for layer in params.layer_weights
        ],
        "self_weights": [_tensor_out(a) for a in params.self_weights],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_checkpoint(path):
    """Returns (params, config or None, id_maps or None, extra)."""
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint format version {version!r}")
    params = ModelParams(
        dim=int(payload["dim"]),
        node_embed={t: _tensor_in(d) for t, d in payload["node_embed"].items()},
        rel_embed={r: _tensor_in(d) for r, d in payload["rel_embed"].items()},
        layer_weights=[
            {k: _tensor_in(d) for k, d in layer.items()} for layer in payload["layer_weights"]
        ],
        self_weights=[_tensor_in(d) for d in payload["self_weights"]],
    )
    config = TrainConfig.from_dict(payload["config"]) if payload.get("config") else None
    id_maps = None
    if payload.get("id_maps"):
        id_maps = {t: {int(i): s for i, s in m.items()} for t, m in payload["id_maps"].items()}
    return params, config, id_maps, payload.get("extra")
