"""Per-epoch loss-weight scheduling for the three label families.

A schedule is a list of keyframes (epoch fraction, weight triple) covering
[0, 1], evaluated under one of three policies:

* linear   - piecewise-linear interpolation between bracketing keyframes;
* stepwise - the most recent keyframe's weights, held constant (instant
  jumps at keyframe crossings);
* constant - the first keyframe everywhere (the no-curriculum setting).

The weight on observed labels never drops below a small floor (default
0.05) so the ground truth is never fully abandoned late in training.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

POLICIES = ("linear", "stepwise", "constant")

OG_FLOOR_DEFAULT = 0.05


@dataclass(frozen=True)
class LossWeights:
    og: float  # observed (ground-truth + sampled negative) labels
    pe: float  # teacher soft labels on the train graph
    pr: float  # teacher soft labels on the per-epoch random graph

    def as_tuple(self):
        return (self.og, self.pe, self.pr)


@dataclass
class ScheduleSpec:
    policy: str = "linear"
    keyframes: list[tuple[float, tuple[float, float, float]]] = field(default_factory=list)
    og_floor: float = OG_FLOOR_DEFAULT
    total_epochs: int = 1

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.policy not in POLICIES:
            raise ConfigError(f"unknown schedule policy {self.policy!r}")
        if not self.keyframes:
            raise ConfigError("schedule needs at least one keyframe")
        if self.total_epochs < 1:
            raise ConfigError("total_epochs must be >= 1")
        fracs = [f for f, _ in self.keyframes]
        if fracs[0] != 0.0:
            raise ConfigError("first keyframe must sit at fraction 0")
        if len(fracs) > 1 and fracs[-1] != 1.0:
            raise ConfigError("last keyframe must sit at fraction 1")
        if any(b <= a for a, b in zip(fracs, fracs[1:])):
            raise ConfigError("keyframe fractions must be strictly increasing")
        for frac, w in self.keyframes:
            if len(w) != 3 or any(x < 0 for x in w):
                raise ConfigError(f"keyframe at {frac}: weights must be three non-negatives")
            if self.og_floor > 0 and w[0] < self.og_floor:
                raise ConfigError(
                    f"keyframe at {frac}: observed-label weight {w[0]} below floor {self.og_floor}"
                )

    def to_dict(self):
        return {
            "policy": self.policy,
            "keyframes": [[f, list(w)] for f, w in self.keyframes],
            "og_floor": self.og_floor,
            "total_epochs": self.total_epochs,
        }

    @staticmethod
    def from_dict(d):
        return ScheduleSpec(
            policy=d.get("policy", "linear"),
            keyframes=[(float(f), tuple(float(x) for x in w)) for f, w in d["keyframes"]],
            og_floor=float(d.get("og_floor", OG_FLOOR_DEFAULT)),
            total_epochs=int(d.get("total_epochs", 1)),
        )

    def with_total_epochs(self, total_epochs: int) -> "ScheduleSpec":
        return ScheduleSpec(self.policy, list(self.keyframes), self.og_floor, total_epochs)


def weights_at(spec: ScheduleSpec, epoch: int) -> LossWeights:
    """Weight triple for an epoch in [0, total_epochs]."""
    if not 0 <= epoch <= spec.total_epochs:
        raise ValueError(f"epoch {epoch} outside [0, {spec.total_epochs}]")
    if spec.policy == "constant" or len(spec.keyframes) == 1:
        return LossWeights(*spec.keyframes[0][1])
    frac = epoch / spec.total_epochs
    fracs = [f for f, _ in spec.keyframes]
    if spec.policy == "stepwise":
        idx = int(np.searchsorted(fracs, frac, side="right")) - 1
        return LossWeights(*spec.keyframes[idx][1])
    idx = int(np.searchsorted(fracs, frac, side="right"))
    if idx >= len(fracs):
        return LossWeights(*spec.keyframes[-1][1])
    lo_f, lo_w = spec.keyframes[idx - 1]
    hi_f, hi_w = spec.keyframes[idx]
    t = (frac - lo_f) / (hi_f - lo_f)
    return LossWeights(*(a + t * (b - a) for a, b in zip(lo_w, hi_w)))


# -- stock schedules ------------------------------------------------------------
# Keyframe positions and peak heights below are engineering defaults chosen
# for the qualitative shape: observed-label weight decays to the floor,
# train-graph soft labels rise then recede, random-graph soft labels rise
# last and dominate the tail. Every run logs its resolved keyframes.


def default_flykd_schedule(total_epochs: int) -> ScheduleSpec:
    return ScheduleSpec(
        policy="linear",
        keyframes=[
            (0.0, (1.0, 0.0, 0.0)),
            (0.3, (0.5, 1.0, 0.0)),
            (0.7, (0.05, 0.5, 1.0)),
            (1.0, (0.05, 0.0, 1.0)),
        ],
        total_epochs=total_epochs,
    )


def default_bkd_curriculum(total_epochs: int) -> ScheduleSpec:
    return ScheduleSpec(
        policy="linear",
        keyframes=[
            (0.0, (1.0, 0.0, 0.0)),
            (0.5, (0.5, 1.0, 0.0)),
            (1.0, (0.05, 1.0, 0.0)),
        ],
        total_epochs=total_epochs,
    )


def constant_schedule(weights, total_epochs: int) -> ScheduleSpec:
    """Fixed weights for the whole run (single keyframe, constant policy)."""
    return ScheduleSpec(
        policy="constant", keyframes=[(0.0, tuple(weights))], total_epochs=total_epochs
    )


def no_curriculum_bkd(total_epochs: int) -> ScheduleSpec:
    """Plain distillation: tiny observed-label weight, full soft-label weight."""
    return constant_schedule((0.05, 1.0, 0.0), total_epochs)


def no_curriculum_flykd(total_epochs: int) -> ScheduleSpec:
    return constant_schedule((0.05, 1.0, 1.0), total_epochs)


def baseline_schedule(total_epochs: int) -> ScheduleSpec:
    return constant_schedule((1.0, 0.0, 0.0), total_epochs)
