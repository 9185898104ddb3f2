"""Model extension strategies: gated parallel adapters, LoRA and finetuning."""

import copy
import logging
from dataclasses import dataclass, field

import numpy as np

from nres.errors import ConfigurationError
from nres.models import ExtensionConfig
from nres.nn.backbone import (
    BackboneModel,
    Block,
    glu_ffn,
    he_init,
    normal_init,
    zeros,
)
from nres.nn.module import Module, count_params
from nres.tensor import Tensor, activation, add, matmul, mul, rowwise_scale

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class InitSpec:
    """Variance of the adapter input, gating and gate-projection weights.

    The output matrix and the gate bias always start at zero.
    """

    variance: float


def low_variance_init(d: int, n_layers: int) -> InitSpec:
    """A_i, A_g and u ~ N(0, 1/(d·L)); A_o = 0; b = 0.

    Raises:
        ConfigurationError: If ``d`` or ``n_layers`` is below 1
    """
    if d < 1 or n_layers < 1:
        raise ConfigurationError(f"d and L must be >= 1, got d={d}, L={n_layers}")
    return InitSpec(variance=1.0 / (d * n_layers))


def he_adapter_init(d: int) -> InitSpec:
    """Vanilla adapter convention: He init everywhere except a zero output."""
    return InitSpec(variance=2.0 / d)


def adapter_hidden_size(
    backbone_params: int, budget: float, n_layers: int, d: int, gated: bool
) -> int:
    """Largest latent h with ``L·(3dh + gate) <= budget·P``.

    The gate costs ``d + 1`` parameters per layer (projection and bias).

    Raises:
        ConfigurationError: If the budget does not allow h >= 1
    """
    gate_params = d + 1 if gated else 0
    h = int(np.floor((budget * backbone_params / n_layers - gate_params) / (3 * d)))
    if h < 1:
        raise ConfigurationError(
            f"budget {budget} of {backbone_params} parameters is too small "
            f"for an adapter latent of at least 1"
        )
    return h


def lora_rank(backbone_params: int, budget: float, pair_dims: int) -> int:
    """Rank r whose ``r·pair_dims`` is closest to ``budget·P``.

    Args:
        pair_dims: Sum of ``fan_in + fan_out`` over every adapted matrix

    Raises:
        ConfigurationError: If the budget does not allow rank >= 1
    """
    r = int(np.rint(budget * backbone_params / pair_dims))
    if r < 1:
        raise ConfigurationError(
            f"budget {budget} of {backbone_params} parameters gives LoRA rank < 1"
        )
    return r


class GatedAdapter(Module):
    """GLU adapter in parallel with a block's FFN, with an optional block gate."""

    def __init__(
        self,
        d: int,
        hidden: int,
        gate: str,
        act: str,
        init: InitSpec,
        rng: np.random.Generator,
    ):
        self.gate = gate
        self.act = act
        self.a_i = normal_init((d, hidden), init.variance, rng)
        self.a_g = normal_init((d, hidden), init.variance, rng)
        self.a_o = zeros((hidden, d))
        if gate != "none":
            self.gate_u = normal_init((d, 1), init.variance, rng)
            self.gate_b = zeros((1,))

    def __call__(self, h: Tensor) -> tuple[Tensor, Tensor | None]:
        """Return the gated output ``y`` and the per-token gate ``g``.

        ``g`` is None for ungated adapters (equivalent to g = 1).
        """
        core = glu_ffn(h, self.a_i, self.a_g, self.a_o, self.act)
        if self.gate == "none":
            return core, None
        g = activation(self.gate, add(matmul(h, self.gate_u), self.gate_b))
        return rowwise_scale(core, g), g


def adapter_forward(
    adapter: GatedAdapter, x_norm: Tensor
) -> tuple[Tensor, Tensor | None]:
    """``y = g · A_o(σ(A_g x) ⊙ A_i x)`` with ``g = act(u·x + b)``."""
    return adapter(x_norm)


class LoraPair(Module):
    """Additive low-rank delta ``down @ up`` for one frozen matrix."""

    def __init__(self, fan_in: int, fan_out: int, rank: int, rng: np.random.Generator):
        self.down = he_init((fan_in, rank), fan_in, rng)
        self.up = zeros((rank, fan_out))

    def apply(self, x: Tensor, weight: Tensor) -> Tensor:
        """``x @ (weight + down @ up)`` evaluated through the low-rank path."""
        return add(matmul(x, weight), matmul(matmul(x, self.down), self.up))

    def delta(self) -> np.ndarray:
        return self.down.data.astype(np.float64) @ self.up.data.astype(np.float64)


class LoraFFN(Module):
    """LoRA pairs on the three matrices of one GLU block."""

    def __init__(self, block: Block, rank: int, rng: np.random.Generator):
        self.w_i = LoraPair(*block.w_i.shape, rank, rng)
        self.w_g = LoraPair(*block.w_g.shape, rank, rng)
        self.w_o = LoraPair(*block.w_o.shape, rank, rng)

    def ffn(self, block: Block, h: Tensor) -> Tensor:
        gate = activation(block.act, self.w_g.apply(h, block.w_g))
        return self.w_o.apply(mul(gate, self.w_i.apply(h, block.w_i)), block.w_o)


@dataclass
class ExtensionOutput:
    """Logits plus the per-layer adapter outputs and gates the losses need."""

    logits: Tensor
    adapter_outputs: list[Tensor] = field(default_factory=list)
    gate_values: list[Tensor] = field(default_factory=list)


class ExtendedModel(Module):
    """Backbone plus per-layer adapters or LoRA pairs, with a freeze mask."""

    def __init__(
        self,
        backbone: BackboneModel,
        config: ExtensionConfig,
        adapters: list[GatedAdapter] | None = None,
        lora: list[LoraFFN] | None = None,
    ):
        self.backbone = backbone
        self.config = config
        self.adapters = adapters or []
        self.lora = lora or []
        if config.method == "finetune":
            backbone.unfreeze()
            self.frozen: frozenset[str] = frozenset()
        else:
            backbone.freeze()
            self.frozen = frozenset(
                f"backbone.{name}" for name, _ in backbone.named_parameters()
            )

    @property
    def model_config(self):
        return self.backbone.config

    def forward(self, tokens: np.ndarray) -> ExtensionOutput:
        """Run ``tokens[B, T]`` through the extended stack.

        Each layer computes ``x + MHA(norm(x))`` then
        ``x + FFN(norm(x)) + Adapter(norm(x))``.
        """
        tokens = np.asarray(tokens)
        if tokens.ndim == 1:
            tokens = tokens[None, :]
        bb = self.backbone
        out = ExtensionOutput(logits=None)  # type: ignore[arg-type]
        x = bb.embed(tokens)
        for i, block in enumerate(bb.layers):
            x = add(x, block.attn(block.attn_norm(x)))
            h = block.ffn_norm(x)
            ffn = self.lora[i].ffn(block, h) if self.lora else block.ffn(h)
            x = add(x, ffn)
            if self.adapters:
                y, g = self.adapters[i](h)
                out.adapter_outputs.append(y)
                if g is not None:
                    out.gate_values.append(g)
                x = add(x, y)
        out.logits = bb.project(x)
        return out

    def logits(self, tokens: np.ndarray) -> np.ndarray:
        """Tape-free logits as a numpy array."""
        return self.forward(tokens).logits.data

    def trainable_parameters(self) -> list[tuple[str, Tensor]]:
        """Parameters outside the freeze mask, in definition order."""
        return [
            (name, p)
            for name, p in self.named_parameters()
            if name not in self.frozen
        ]

    def gating_matrices(self) -> list[tuple[str, int, np.ndarray]]:
        """Effective backbone ``W_g`` and adapter ``A_g`` of every layer."""
        result = []
        for i, block in enumerate(self.backbone.layers):
            w_g = block.w_g.data.astype(np.float64)
            if self.lora:
                w_g = w_g + self.lora[i].w_g.delta()
            result.append(("backbone", i, w_g))
        for i, adapter in enumerate(self.adapters):
            result.append(("adapter", i, adapter.a_g.data.astype(np.float64)))
        return result

    def snapshot(self) -> "ExtendedModel":
        """Independent deep copy for concurrent read-only evaluation."""
        return copy.deepcopy(self)


def trainable_parameters(model: ExtendedModel) -> list[tuple[str, Tensor]]:
    return model.trainable_parameters()


def attach_adapters(
    backbone: BackboneModel, config: ExtensionConfig, seed: int = 0
) -> ExtendedModel:
    """Add a parallel (optionally gated) GLU adapter to every layer.

    Raises:
        ConfigurationError: If ``config.method`` is not adapter or h < 1
    """
    if config.method != "adapter":
        raise ConfigurationError(
            f"attach_adapters needs method 'adapter', got {config.method}"
        )
    mc = backbone.config
    d, n_layers = mc.model_dim, mc.n_layers
    gated = config.gate != "none"
    hidden = adapter_hidden_size(
        count_params(backbone), config.budget_fraction, n_layers, d, gated
    )
    init = (
        low_variance_init(d, n_layers)
        if config.init_scheme == "low_variance"
        else he_adapter_init(d)
    )
    rng = np.random.default_rng(seed)
    adapters = [
        GatedAdapter(d, hidden, config.gate, mc.activation, init, rng)
        for _ in range(n_layers)
    ]
    logger.info(
        "Attached %s adapters: latent %d per layer, gate %s, init %s",
        n_layers,
        hidden,
        config.gate,
        config.init_scheme,
    )
    return ExtendedModel(backbone, config, adapters=adapters)


def attach_lora(
    backbone: BackboneModel, config: ExtensionConfig, seed: int = 0
) -> ExtendedModel:
    """Add LoRA pairs to W_i, W_g and W_o of every FFN.

    Raises:
        ConfigurationError: If ``config.method`` is not lora or rank < 1
    """
    if config.method != "lora":
        raise ConfigurationError(
            f"attach_lora needs method 'lora', got {config.method}"
        )
    pair_dims = sum(
        sum(w.shape)
        for block in backbone.layers
        for w in (block.w_i, block.w_g, block.w_o)
    )
    rank = lora_rank(count_params(backbone), config.budget_fraction, pair_dims)
    rng = np.random.default_rng(seed)
    lora = [LoraFFN(block, rank, rng) for block in backbone.layers]
    logger.info("Attached LoRA to %d FFN blocks: rank %d", len(lora), rank)
    return ExtendedModel(backbone, config, lora=lora)


def attach_finetune(backbone: BackboneModel, config: ExtensionConfig) -> ExtendedModel:
    """Wrap the backbone with every parameter trainable."""
    if config.method != "finetune":
        raise ConfigurationError(
            f"attach_finetune needs method 'finetune', got {config.method}"
        )
    return ExtendedModel(backbone, config)


def extend(
    backbone: BackboneModel, config: ExtensionConfig, seed: int = 0
) -> ExtendedModel:
    """Apply the extension strategy named by ``config.method``."""
    if config.method == "adapter":
        return attach_adapters(backbone, config, seed)
    if config.method == "lora":
        return attach_lora(backbone, config, seed)
    return attach_finetune(backbone, config)
