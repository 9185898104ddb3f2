"""Backbone architecture configuration."""

from typing import Literal

from pydantic import Field, model_validator

from .base import StrictModel


class ModelConfig(StrictModel):
    """Shape of the GLU-transformer language model.

    Defaults are the desk-scale backbone: the FFN latent is about ``d * 11/4``.
    """

    n_layers: int = Field(default=2, gt=0)
    model_dim: int = Field(default=64, gt=0)
    n_heads: int = Field(default=4, gt=0)
    ffn_latent: int = Field(default=176, gt=0)
    vocab_size: int = Field(default=256, ge=2)
    activation: Literal["silu", "gelu"] = "silu"
    max_seq_len: int = Field(default=128, gt=0)
    norm_eps: float = Field(default=1e-5, gt=0)

    @model_validator(mode="after")
    def check_heads(self) -> "ModelConfig":
        if self.model_dim % self.n_heads != 0:
            raise ValueError(
                f"model_dim {self.model_dim} is not divisible by "
                f"n_heads {self.n_heads}"
            )
        return self

    @property
    def head_dim(self) -> int:
        return self.model_dim // self.n_heads
