"""Optimizer, schedule, training loops and checkpoints."""

from nres.training.checkpoint import (
    Checkpoint,
    decode_checkpoint,
    encode_checkpoint,
    load_checkpoint,
    read_checkpoint,
    save_checkpoint,
)
from nres.training.loop import (
    Corpora,
    MetricsWriter,
    batch_loss,
    evaluate,
    pretrain_backbone,
    train_extension,
)
from nres.training.optim import (
    AdamW,
    OptimState,
    adamw_step,
    check_finite,
    clip_grad_norm,
)
from nres.training.schedule import lr_schedule

__all__ = [
    "AdamW",
    "Checkpoint",
    "Corpora",
    "MetricsWriter",
    "OptimState",
    "adamw_step",
    "batch_loss",
    "check_finite",
    "clip_grad_norm",
    "decode_checkpoint",
    "encode_checkpoint",
    "evaluate",
    "load_checkpoint",
    "lr_schedule",
    "pretrain_backbone",
    "read_checkpoint",
    "save_checkpoint",
    "train_extension",
]
