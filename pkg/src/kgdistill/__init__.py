"""Knowledge-graph link prediction with teacher-student distillation.

Implements a relational message-passing encoder with a trilinear decoder,
three distillation strategies (score distillation on the train graph,
local-structure matching, and on-the-fly degree-aware random-graph
labeling under a curriculum of loss weights), and the paired-by-seed
evaluation protocol around them.
"""

from .curriculum import (
    LossWeights,
    ScheduleSpec,
    constant_schedule,
    default_bkd_curriculum,
    default_flykd_schedule,
    no_curriculum_bkd,
    no_curriculum_flykd,
    weights_at,
)
from .graph import HeteroGraph, LabeledEdgeSet, Relation, TripleSet, load_graph, write_edge_list
from .metrics import auprc, macro_auprc, relative_gains
from .model import ModelParams, TrainConfig, backward, bce_loss, distmult_score, encode
from .optim import AdamState, adam_step, plateau_lr
from .pseudo import RandomGraphSpec, generate_random_graph, teacher_pseudo_labels
from .runner import DataSpec, ExperimentPlan, run_plan
from .splits import SplitSpec, sample_negatives, split
from .synthetic import generate_synthetic_kg
from .training import MethodSpec, train_baseline, train_bkd, train_flykd, train_lsp

__all__ = [
    "AdamState",
    "DataSpec",
    "ExperimentPlan",
    "HeteroGraph",
    "LabeledEdgeSet",
    "LossWeights",
    "MethodSpec",
    "ModelParams",
    "RandomGraphSpec",
    "Relation",
    "ScheduleSpec",
    "SplitSpec",
    "TrainConfig",
    "TripleSet",
    "adam_step",
    "auprc",
    "backward",
    "bce_loss",
    "constant_schedule",
    "default_bkd_curriculum",
    "default_flykd_schedule",
    "distmult_score",
    "encode",
    "generate_random_graph",
    "generate_synthetic_kg",
    "load_graph",
    "macro_auprc",
    "no_curriculum_bkd",
    "no_curriculum_flykd",
    "plateau_lr",
    "relative_gains",
    "run_plan",
    "sample_negatives",
    "split",
    "teacher_pseudo_labels",
    "train_baseline",
    "train_bkd",
    "train_flykd",
    "train_lsp",
    "weights_at",
    "write_edge_list",
]
