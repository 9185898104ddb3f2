"""Backbone, extension strategies and training losses."""

from nres.nn.backbone import (
    Attention,
    BackboneModel,
    Block,
    Embedding,
    RMSNorm,
    expected_param_count,
    forward_lm,
    glu_ffn,
    he_init,
    he_variance,
    mha,
)
from nres.nn.extension import (
    ExtendedModel,
    ExtensionOutput,
    GatedAdapter,
    InitSpec,
    LoraFFN,
    LoraPair,
    adapter_forward,
    adapter_hidden_size,
    attach_adapters,
    attach_finetune,
    attach_lora,
    extend,
    he_adapter_init,
    lora_rank,
    low_variance_init,
    trainable_parameters,
)
from nres.nn.losses import (
    DomainMask,
    LossBreakdown,
    combine,
    gate_ce_loss,
    l1_local_loss,
)
from nres.nn.module import Module, count_params

__all__ = [
    # Containers
    "Module",
    "count_params",
    # Backbone
    "Attention",
    "BackboneModel",
    "Block",
    "Embedding",
    "RMSNorm",
    "expected_param_count",
    "forward_lm",
    "glu_ffn",
    "he_init",
    "he_variance",
    "mha",
    # Extension
    "ExtendedModel",
    "ExtensionOutput",
    "GatedAdapter",
    "InitSpec",
    "LoraFFN",
    "LoraPair",
    "adapter_forward",
    "adapter_hidden_size",
    "attach_adapters",
    "attach_finetune",
    "attach_lora",
    "extend",
    "he_adapter_init",
    "lora_rank",
    "low_variance_init",
    "trainable_parameters",
    # Losses
    "DomainMask",
    "LossBreakdown",
    "combine",
    "gate_ce_loss",
    "l1_local_loss",
]
