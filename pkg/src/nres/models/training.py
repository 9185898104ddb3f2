"""Optimization settings for pretraining and extension runs."""

from typing import Optional

from pydantic import Field, model_validator

from .base import StrictModel


class TrainConfig(StrictModel):
    """Desk-scale training loop settings.

    ``lr`` is the peak learning rate; when None the extension method's
    default applies.
    """

    lr: Optional[float] = Field(default=None, gt=0.0)
    warmup_steps: int = Field(default=100, ge=0)
    total_steps: int = Field(default=600, ge=0)
    batch_size: int = Field(default=16, gt=0)
    seq_len: int = Field(default=128, ge=2)
    p: float = Field(default=0.1, ge=0.0, le=1.0)
    weight_decay: float = Field(default=0.0, ge=0.0)
    grad_clip: float = Field(default=1.0, gt=0.0)
    beta1: float = Field(default=0.9, ge=0.0, lt=1.0)
    beta2: float = Field(default=0.95, ge=0.0, lt=1.0)
    eps: float = Field(default=1e-8, gt=0.0)
    seed: int = 0
    eval_interval: int = Field(default=100, gt=0)
    eval_windows: Optional[int] = Field(default=32, gt=0)

    @model_validator(mode="after")
    def check_warmup(self) -> "TrainConfig":
        if self.warmup_steps > self.total_steps:
            raise ValueError(
                f"warmup_steps {self.warmup_steps} exceeds "
                f"total_steps {self.total_steps}"
            )
        return self


def default_pretrain_config() -> TrainConfig:
    """Backbone pretraining defaults: 2k steps, all data from the original corpus."""
    return TrainConfig(
        lr=3e-3,
        warmup_steps=200,
        total_steps=2000,
        p=1.0,
        weight_decay=0.1,
        eval_interval=250,
    )
