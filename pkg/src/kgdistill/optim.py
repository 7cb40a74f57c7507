"""Adam with bias correction, plus the late-window plateau LR rule."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import Gradients, ModelParams, TrainConfig

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
LR_MULTIPLIER_FLOOR = 1e-6


@dataclass
class AdamState:
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)

    def copy(self):
        return AdamState(
            self.step,
            {k: a.copy() for k, a in self.m.items()},
            {k: a.copy() for k, a in self.v.items()},
        )


def adam_step(
    params: ModelParams,
    grads: Gradients,
    state: AdamState,
    lr: float,
    in_place: bool = False,
) -> tuple[ModelParams, AdamState]:
    """One Adam update over every parameter tensor.

    Pure by default; in_place=True mutates params/state (training loops use
    this, tests use the pure form).
    """
    for name, g in grads.tensors():
        if not np.isfinite(g).all():
            raise FloatingPointError(f"non-finite gradient in tensor {name}")

    if not in_place:
        params = params.copy()
        state = state.copy()
    state.step += 1
    t = state.step
    bc1 = 1.0 - ADAM_BETA1**t
    bc2 = 1.0 - ADAM_BETA2**t
    param_tensors = dict(params.tensors())
    for name, g in grads.tensors():
        p = param_tensors[name]
        m = state.m.setdefault(name, np.zeros_like(p))
        v = state.v.setdefault(name, np.zeros_like(p))
        m *= ADAM_BETA1
        m += (1.0 - ADAM_BETA1) * g
        v *= ADAM_BETA2
        v += (1.0 - ADAM_BETA2) * np.square(g)
        p -= lr * (m / bc1) / (np.sqrt(v / bc2) + ADAM_EPS)
    return params, state


def plateau_lr(history, config: TrainConfig) -> float:
    """Learning-rate multiplier from the validation-metric history so far.

    The rule is inert until the last `plateau_window` epochs of the
    finetuning phase. Inside the window, each stretch of `plateau_patience`
    consecutive epochs without improvement over the best metric seen so far
    multiplies the rate by `plateau_factor`. Higher metric is better. The
    multiplier never drops below LR_MULTIPLIER_FLOOR.
    """
    window_start = max(0, config.finetune_epochs - config.plateau_window)
    multiplier = 1.0
    best = -np.inf
    wait = 0
    for epoch, value in enumerate(history):
        if epoch < window_start:
            best = max(best, value)
            continue
        if value > best:
            best = value
            wait = 0
        else:
            wait += 1
            if wait >= config.plateau_patience:
                multiplier = max(multiplier * config.plateau_factor, LR_MULTIPLIER_FLOOR)
                wait = 0
    return multiplier
