"""Training orchestrators: no-distillation baseline, score distillation,
local-structure distillation, and on-the-fly random-graph distillation.

All four run the same two-phase recipe. A short pretraining phase fits the
model on every relation's observed edges (with matched negatives); the long
finetuning phase then optimizes the target relations only, resampling
negatives 1:1 each epoch, with the plateau LR rule active in the last
window. Distillation enters only in the finetuning loop, as extra loss
heads whose weights come from the per-epoch scheduler:

    total = og_w * L_og + pe_w * L_pe + pr_w * L_pr (+ lsp_w * L_lsp)

A head with weight exactly 0 is skipped outright (its component logs 0.0),
so a run whose random-graph weight is zero everywhere is bit-for-bit the
score-distillation run, and one with all soft-label weights zero is
bit-for-bit the baseline. Every stochastic ingredient draws from its own
(seed, purpose) stream, so those equivalences hold across methods sharing
a seed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .curriculum import (
    ScheduleSpec,
    baseline_schedule,
    default_bkd_curriculum,
    default_flykd_schedule,
    no_curriculum_bkd,
    weights_at,
)
from .errors import ConfigError, MetricError, TrainingDivergenceError
from .graph import HeteroGraph, LabeledEdgeSet, TripleSet
from .lsp import build_neighbor_structure, local_structure_profiles, lsp_loss_and_layer_grads
from .metrics import auprc
from .model import (
    ModelParams,
    TrainConfig,
    backprop_layers,
    bce_loss,
    distmult_backward,
    distmult_score,
    encode,
    forward_pass,
    init_params,
    zeros_like_params,
)
from .optim import AdamState, adam_step, plateau_lr
from .pseudo import EpochLabelCache, PseudoLabelBudget, RandomGraphSpec, teacher_pseudo_labels
from .rng import rng_stream
from .splits import SplitResult, known_positive_keys, sample_negatives

METHODS = ("baseline", "bkd", "lsp", "flykd")


@dataclass
class MethodSpec:
    method: str = "flykd"
    name: str | None = None
    curriculum: ScheduleSpec | None = None
    random_graph: RandomGraphSpec | None = None
    lsp_layers: int = 1
    lsp_kernel_sigma: float = 1.0
    lsp_weight: float = 1.0
    use_train_pseudo: bool = True

    def __post_init__(self):
        if self.name is None:
            self.name = self.method

    def validate(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        if self.method != "flykd":
            if self.random_graph is not None:
                raise ConfigError(f"{self.method}: random_graph only applies to flykd")
            if not self.use_train_pseudo:
                raise ConfigError(f"{self.method}: use_train_pseudo only applies to flykd")
        if self.method == "baseline" and self.curriculum is not None:
            raise ConfigError("baseline takes no curriculum")
        if self.method == "lsp":
            if self.lsp_layers not in (1, 2):
                raise ConfigError("lsp_layers must be 1 or 2")
            if self.lsp_kernel_sigma <= 0:
                raise ConfigError("lsp_kernel_sigma must be positive")

    def to_dict(self):
        return {
            "method": self.method,
            "name": self.name,
            "curriculum": self.curriculum.to_dict() if self.curriculum else None,
            "random_graph": self.random_graph.to_dict() if self.random_graph else None,
            "lsp_layers": self.lsp_layers,
            "lsp_kernel_sigma": self.lsp_kernel_sigma,
            "lsp_weight": self.lsp_weight,
            "use_train_pseudo": self.use_train_pseudo,
        }

    @staticmethod
    def from_dict(d):
        spec = MethodSpec(
            method=d.get("method", "flykd"),
            name=d.get("name"),
            curriculum=ScheduleSpec.from_dict(d["curriculum"]) if d.get("curriculum") else None,
            random_graph=(
                RandomGraphSpec.from_dict(d["random_graph"]) if d.get("random_graph") else None
            ),
            lsp_layers=int(d.get("lsp_layers", 1)),
            lsp_kernel_sigma=float(d.get("lsp_kernel_sigma", 1.0)),
            lsp_weight=float(d.get("lsp_weight", 1.0)),
            use_train_pseudo=bool(d.get("use_train_pseudo", True)),
        )
        spec.validate()
        return spec


@dataclass
class EpochRecord:
    epoch: int
    og_w: float
    pe_w: float
    pr_w: float
    lsp_w: float
    loss_og: float
    loss_pe: float
    loss_pr: float
    loss_lsp: float
    loss_total: float
    lr_multiplier: float
    val_auprc: float
    seconds: float


@dataclass
class TrainResult:
    params: ModelParams  # best-validation snapshot
    final_params: ModelParams
    trace: list[EpochRecord]
    best_val_auprc: float
    best_epoch: int
    wall_time_s: float
    pseudo_budget: PseudoLabelBudget | None = None


# -- evaluation helpers -------------------------------------------------------


def relation_candidates(
    positives: LabeledEdgeSet, negatives: LabeledEdgeSet, rel_id: int
) -> tuple[TripleSet, np.ndarray]:
    """Scoring pool for one relation: its positives plus its negatives."""
    parts, labels = [], []
    for labeled, value in ((positives, 1.0), (negatives, 0.0)):
        m = labeled.triples.rel_ids == rel_id
        parts.append(TripleSet(labeled.triples.rel_ids[m], labeled.triples.src[m], labeled.triples.dst[m]))
        labels.append(np.full(int(m.sum()), value))
    return TripleSet.concat(parts), np.concatenate(labels)


def evaluate_macro_auprc(
    params: ModelParams,
    graph: HeteroGraph,
    positives: LabeledEdgeSet,
    negatives: LabeledEdgeSet,
    rel_names: list[str],
    embeddings=None,
) -> tuple[float, dict[str, float]]:
    """Macro average precision over target relations.

    Relations whose candidate pool lacks a class are skipped; at least one
    scoreable relation is required.
    """
    h = embeddings if embeddings is not None else encode(params, graph)
    per_rel = {}
    for name in rel_names:
        rid = graph.rel_index[name]
        triples, labels = relation_candidates(positives, negatives, rid)
        if not len(labels) or labels.min() == labels.max():
            continue
        scores = distmult_score(h, triples, params.rel_embed, graph)
        per_rel[name] = auprc(scores, labels)
    if not per_rel:
        raise MetricError("no target relation has both positives and negatives")
    return float(np.mean(list(per_rel.values()))), per_rel


# -- the shared engine --------------------------------------------------------


def _positives(graph: HeteroGraph, rel_names) -> LabeledEdgeSet:
    triples = graph.triples(rel_names)
    return LabeledEdgeSet(triples, np.ones(len(triples)), "ground-truth")


def _concat_labeled(a: LabeledEdgeSet, b: LabeledEdgeSet):
    triples = TripleSet.concat([a.triples, b.triples])
    return triples, np.concatenate([a.targets, b.targets])


@dataclass
class _KdSetup:
    teacher_embeddings: dict | None = None
    train_pseudo: LabeledEdgeSet | None = None
    random_cache: EpochLabelCache | None = None
    lsp_structure: object | None = None
    lsp_profiles: dict | None = None
    lsp_layers: list[int] = field(default_factory=list)
    lsp_sigma: float = 1.0
    lsp_weight: float = 0.0


def _train(
    splits: SplitResult,
    config: TrainConfig,
    dim: int,
    schedule: ScheduleSpec,
    kd: _KdSetup,
) -> TrainResult:
    config.validate()
    t_start = time.perf_counter()
    graph = splits.train
    seed = config.seed
    target_names = splits.spec.target_relations
    schedule = schedule.with_total_epochs(max(config.finetune_epochs, 1))

    params = init_params(graph, dim, config.n_layers, rng_stream(seed, "init"))

    # Phase 1: fit every relation's observed edges.
    all_names = [r.name for r in graph.relations if graph.n_edges(r.name)]
    all_pos = _positives(graph, all_names)
    all_keys = known_positive_keys(graph, all_pos)
    pre_rng = rng_stream(seed, "pretrain-negatives")
    state = AdamState()
    for epoch in range(config.pretrain_epochs):
        negs = sample_negatives(graph, all_pos, pre_rng, known_keys=all_keys)
        triples, targets_arr = _concat_labeled(all_pos, negs)
        cache = forward_pass(params, graph)
        h = cache.hidden[-1]
        logits = distmult_score(h, triples, params.rel_embed, graph)
        loss, dlogits = bce_loss(logits, targets_arr)
        if not np.isfinite(loss):
            raise TrainingDivergenceError("pretraining loss is non-finite", epoch)
        dh, drel = distmult_backward(h, triples, params.rel_embed, graph, dlogits)
        grads = zeros_like_params(params)
        for r in drel:
            grads.rel_embed[r] += drel[r]
        backprop_layers(params, graph, cache, {params.n_layers: dh}, grads=grads)
        adam_step(params, grads, state, config.pretrain_lr, in_place=True)

    # Phase 2: finetune on the target relations with distillation heads.
    target_pos = _positives(graph, target_names)
    target_keys = known_positive_keys(graph, target_pos)
    fin_rng = rng_stream(seed, "finetune-negatives")
    # Zero-shot (node-holdout) pools rank sources for a held-out dst, so
    # evaluation negatives corrupt the src side; transductive pools corrupt
    # dst like training does.
    eval_corrupt = "src" if splits.spec.mode == "node-holdout" else "dst"
    valid_negs = sample_negatives(
        graph, splits.valid, rng_stream(seed, "valid-negatives"), corrupt=eval_corrupt
    )
    val_pools = {}
    for name in target_names:
        rid = graph.rel_index[name]
        triples, labels = relation_candidates(splits.valid, valid_negs, rid)
        if len(labels) and labels.min() != labels.max():
            val_pools[name] = (triples, labels)
    if not val_pools:
        raise MetricError("no target relation has both validation positives and negatives")
    state = AdamState()

    best_params = params.copy()
    best_val = -np.inf
    best_epoch = -1
    val_history: list[float] = []
    trace: list[EpochRecord] = []

    for epoch in range(config.finetune_epochs):
        t_epoch = time.perf_counter()
        lam = weights_at(schedule, epoch)
        lr_mult = plateau_lr(val_history, config)

        negs = sample_negatives(graph, target_pos, fin_rng, known_keys=target_keys)
        cache = forward_pass(params, graph)
        h = cache.hidden[-1]

        heads = []  # (slot, triples, targets, weight) in fixed order
        og_triples, og_targets = _concat_labeled(target_pos, negs)
        heads.append(("og", og_triples, og_targets, lam.og))
        if kd.train_pseudo is not None:
            heads.append(("pe", kd.train_pseudo.triples, kd.train_pseudo.targets, lam.pe))
        if kd.random_cache is not None and lam.pr > 0.0:
            labels = kd.random_cache.labels_for_epoch(epoch)
            heads.append(("pr", labels.triples, labels.targets, lam.pr))

        components = {"og": 0.0, "pe": 0.0, "pr": 0.0, "lsp": 0.0}
        grads = zeros_like_params(params)
        dh_final = {t: np.zeros_like(a) for t, a in h.items()}
        total = 0.0
        for slot, triples, targets_arr, weight in heads:
            if weight == 0.0 or len(triples) == 0:
                continue
            logits = distmult_score(h, triples, params.rel_embed, graph)
            raw_loss, raw_grad = bce_loss(logits, targets_arr)
            components[slot] = raw_loss
            total += weight * raw_loss
            dh, drel = distmult_backward(h, triples, params.rel_embed, graph, weight * raw_grad)
            for t in dh_final:
                dh_final[t] += dh[t]
            for r in drel:
                grads.rel_embed[r] += drel[r]

        layer_grads = {params.n_layers: dh_final}
        if kd.lsp_weight > 0.0 and kd.lsp_layers:
            lsp_loss, lsp_grads = lsp_loss_and_layer_grads(
                cache, kd.lsp_profiles, kd.lsp_structure, kd.lsp_sigma, kd.lsp_layers
            )
            components["lsp"] = lsp_loss
            total += kd.lsp_weight * lsp_loss
            for l, per_type in lsp_grads.items():
                if l == params.n_layers:
                    for t in per_type:
                        layer_grads[l][t] = layer_grads[l][t] + kd.lsp_weight * per_type[t]
                else:
                    layer_grads[l] = {t: kd.lsp_weight * a for t, a in per_type.items()}

        if not np.isfinite(total):
            raise TrainingDivergenceError("finetuning loss is non-finite", epoch)

        backprop_layers(params, graph, cache, layer_grads, grads=grads)
        adam_step(params, grads, state, config.finetune_lr * lr_mult, in_place=True)

        h_val = encode(params, graph)
        vals = []
        for triples, labels in val_pools.values():
            scores = distmult_score(h_val, triples, params.rel_embed, graph)
            if not np.isfinite(scores).all():
                raise TrainingDivergenceError("validation scores are non-finite", epoch)
            vals.append(auprc(scores, labels))
        val = float(np.mean(vals))
        val_history.append(val)
        if val > best_val:
            best_val = val
            best_epoch = epoch
            best_params = params.copy()

        if kd.random_cache is not None:
            kd.random_cache.budget.observe_epoch()

        trace.append(
            EpochRecord(
                epoch=epoch,
                og_w=lam.og,
                pe_w=lam.pe,
                pr_w=lam.pr,
                lsp_w=kd.lsp_weight if kd.lsp_layers else 0.0,
                loss_og=components["og"],
                loss_pe=components["pe"],
                loss_pr=components["pr"],
                loss_lsp=components["lsp"],
                loss_total=total,
                lr_multiplier=lr_mult,
                val_auprc=val,
                seconds=time.perf_counter() - t_epoch,
            )
        )

    if config.finetune_epochs == 0:
        best_params = params.copy()
        best_val, _ = evaluate_macro_auprc(params, graph, splits.valid, valid_negs, target_names)
        best_epoch = -1

    params.assert_finite()
    return TrainResult(
        params=best_params,
        final_params=params,
        trace=trace,
        best_val_auprc=float(best_val),
        best_epoch=best_epoch,
        wall_time_s=time.perf_counter() - t_start,
        pseudo_budget=kd.random_cache.budget if kd.random_cache else None,
    )


def _train_pseudo_labels(teacher, graph, targets, seed, teacher_embeddings):
    """Teacher soft labels on the train-graph target edges plus one fixed
    draw of matched negatives (fixed across epochs)."""
    pos = _positives(graph, targets)
    negs = sample_negatives(graph, pos, rng_stream(seed, "train-pseudo-negatives"))
    triples = TripleSet.concat([pos.triples, negs.triples])
    return teacher_pseudo_labels(
        teacher, graph, triples, teacher_embeddings=teacher_embeddings
    )


# -- public trainers ----------------------------------------------------------


def train_baseline(splits: SplitResult, config: TrainConfig, dim: int | None = None) -> TrainResult:
    """No distillation: observed labels only, both phases."""
    dim = config.d_student if dim is None else dim
    schedule = baseline_schedule(max(config.finetune_epochs, 1))
    return _train(splits, config, dim, schedule, _KdSetup())


def train_bkd(
    teacher: ModelParams,
    splits: SplitResult,
    config: TrainConfig,
    curriculum: ScheduleSpec | None = None,
) -> TrainResult:
    """Score distillation on the train graph (no random-graph labels).

    The default schedule is the constant plain-distillation weighting;
    passing a linear schedule gives the curriculum variant.
    """
    schedule = curriculum if curriculum is not None else no_curriculum_bkd(max(config.finetune_epochs, 1))
    graph = splits.train
    teacher_h = encode(teacher, graph)
    kd = _KdSetup(
        teacher_embeddings=teacher_h,
        train_pseudo=_train_pseudo_labels(
            teacher, graph, splits.spec.target_relations, config.seed, teacher_h
        ),
    )
    return _train(splits, config, config.d_student, schedule, kd)


def train_lsp(
    teacher: ModelParams,
    splits: SplitResult,
    config: TrainConfig,
    lsp_layers: int = 1,
    sigma: float = 1.0,
    lsp_weight: float = 1.0,
    curriculum: ScheduleSpec | None = None,
) -> TrainResult:
    """Local-structure distillation over the last `lsp_layers` layer outputs."""
    if teacher.n_layers != config.n_layers:
        raise ConfigError("teacher and student must have equal layer counts for lsp")
    if lsp_layers not in (1, 2):
        raise ConfigError("lsp_layers must be 1 or 2")
    schedule = curriculum if curriculum is not None else baseline_schedule(max(config.finetune_epochs, 1))
    graph = splits.train
    structure = build_neighbor_structure(graph)
    teacher_cache = forward_pass(teacher, graph)
    layers = list(range(config.n_layers - lsp_layers + 1, config.n_layers + 1))
    profiles = {
        l: local_structure_profiles(teacher_cache.hidden[l], structure, sigma) for l in layers
    }
    kd = _KdSetup(
        lsp_structure=structure,
        lsp_profiles=profiles,
        lsp_layers=layers,
        lsp_sigma=sigma,
        lsp_weight=lsp_weight,
    )
    return _train(splits, config, config.d_student, schedule, kd)


def train_flykd(
    teacher: ModelParams,
    splits: SplitResult,
    config: TrainConfig,
    spec: MethodSpec | None = None,
) -> TrainResult:
    """The full on-the-fly loop: observed labels, train-graph soft labels,
    and per-epoch random-graph soft labels under the curriculum scheduler."""
    spec = spec if spec is not None else MethodSpec(method="flykd")
    spec.validate()
    if spec.method != "flykd":
        raise ConfigError(f"train_flykd got method {spec.method!r}")
    schedule = (
        spec.curriculum
        if spec.curriculum is not None
        else default_flykd_schedule(max(config.finetune_epochs, 1))
    )
    rg = spec.random_graph if spec.random_graph is not None else RandomGraphSpec()
    if rg.relations is None:
        rg = RandomGraphSpec(
            k=rg.k,
            power=rg.power,
            regenerate_every=rg.regenerate_every,
            strong_score_threshold=rg.strong_score_threshold,
            two_sided_threshold=rg.two_sided_threshold,
            relations=list(splits.spec.target_relations),
        )
    graph = splits.train
    teacher_h = encode(teacher, graph)
    kd = _KdSetup(
        teacher_embeddings=teacher_h,
        train_pseudo=(
            _train_pseudo_labels(
                teacher, graph, splits.spec.target_relations, config.seed, teacher_h
            )
            if spec.use_train_pseudo
            else None
        ),
        random_cache=EpochLabelCache(
            teacher, graph, rg, rng_stream(config.seed, "random-graph"), teacher_embeddings=teacher_h
        ),
    )
    return _train(splits, config, config.d_student, schedule, kd)


def train_method(
    teacher: ModelParams | None,
    splits: SplitResult,
    config: TrainConfig,
    spec: MethodSpec,
) -> TrainResult:
    """Dispatch a MethodSpec to its trainer."""
    spec.validate()
    if spec.method == "baseline":
        return train_baseline(splits, config)
    if teacher is None:
        raise ConfigError(f"{spec.method} needs a trained teacher")
    if spec.method == "bkd":
        curriculum = spec.curriculum or no_curriculum_bkd(max(config.finetune_epochs, 1))
        return train_bkd(teacher, splits, config, curriculum)
    if spec.method == "lsp":
        return train_lsp(
            teacher,
            splits,
            config,
            lsp_layers=spec.lsp_layers,
            sigma=spec.lsp_kernel_sigma,
            lsp_weight=spec.lsp_weight,
            curriculum=spec.curriculum,
        )
    return train_flykd(teacher, splits, config, spec)
