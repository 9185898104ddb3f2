"""Decoder-only GLU transformer that stands in for the pretrained model."""

import numpy as np

from nres.errors import ConfigurationError
from nres.models import ModelConfig
from nres.nn.module import Module
from nres.tensor import (
    Tensor,
    activation,
    add,
    causal_softmax,
    embedding,
    get_dtype,
    matmul,
    mul,
    reshape,
    rms_norm,
    scale,
    transpose,
)

EMBED_STD = 0.02


def he_variance(fan_in: int) -> float:
    """Variance of He initialization, 2 / fan_in."""
    return 2.0 / fan_in


def he_init(
    shape: tuple[int, ...], fan_in: int, rng: np.random.Generator
) -> Tensor:
    """Sample N(0, 2/fan_in) weights from ``rng``.

    Raises:
        ConfigurationError: If ``fan_in`` is not positive
    """
    if fan_in <= 0:
        raise ConfigurationError(f"fan_in must be positive, got {fan_in}")
    std = np.sqrt(he_variance(fan_in))
    return Tensor(rng.normal(0.0, std, size=shape), requires_grad=True)


def normal_init(
    shape: tuple[int, ...], variance: float, rng: np.random.Generator
) -> Tensor:
    return Tensor(rng.normal(0.0, np.sqrt(variance), size=shape), requires_grad=True)


def zeros(shape: tuple[int, ...]) -> Tensor:
    return Tensor(np.zeros(shape, dtype=get_dtype()), requires_grad=True)


def ones(shape: tuple[int, ...]) -> Tensor:
    return Tensor(np.ones(shape, dtype=get_dtype()), requires_grad=True)


def glu_ffn(
    x: Tensor, w_i: Tensor, w_g: Tensor, w_o: Tensor, act: str = "silu"
) -> Tensor:
    """Gated feed-forward block ``W_o(σ(W_g x) ⊙ W_i x)`` applied per token.

    Weights use row-vector convention: ``w_i, w_g`` are ``[d, latent]`` and
    ``w_o`` is ``[latent, d]``.
    """
    return matmul(mul(activation(act, matmul(x, w_g)), matmul(x, w_i)), w_o)


class Embedding(Module):
    """Lookup table of learned vectors."""

    def __init__(self, rows: int, dim: int, rng: np.random.Generator):
        self.weight = normal_init((rows, dim), EMBED_STD**2, rng)

    def __call__(self, ids: np.ndarray) -> Tensor:
        return embedding(self.weight, ids)


class RMSNorm(Module):
    def __init__(self, dim: int, eps: float):
        self.weight = ones((dim,))
        self.eps = eps

    def __call__(self, x: Tensor) -> Tensor:
        return rms_norm(x, self.weight, self.eps)


class Attention(Module):
    """Multi-head causal self-attention."""

    def __init__(self, config: ModelConfig, rng: np.random.Generator):
        d = config.model_dim
        self.config = config
        self.w_q = he_init((d, d), d, rng)
        self.w_k = he_init((d, d), d, rng)
        self.w_v = he_init((d, d), d, rng)
        self.w_o = he_init((d, d), d, rng)

    def __call__(self, x: Tensor) -> Tensor:
        """Attend over ``x[B, T, d]`` (or ``[T, d]``).

        Raises:
            ConfigurationError: If T exceeds ``max_seq_len``
        """
        squeeze = x.ndim == 2
        if squeeze:
            x = reshape(x, (1,) + x.shape)
        b, t, d = x.shape
        if t > self.config.max_seq_len:
            raise ConfigurationError(
                f"sequence length {t} exceeds max_seq_len {self.config.max_seq_len}"
            )
        h, hd = self.config.n_heads, self.config.head_dim

        def heads(w: Tensor) -> Tensor:
            return transpose(reshape(matmul(x, w), (b, t, h, hd)), (0, 2, 1, 3))

        q, k, v = heads(self.w_q), heads(self.w_k), heads(self.w_v)
        scores = scale(matmul(q, transpose(k, (0, 1, 3, 2))), 1.0 / np.sqrt(hd))
        mixed = matmul(causal_softmax(scores), v)
        out = matmul(reshape(transpose(mixed, (0, 2, 1, 3)), (b, t, d)), self.w_o)
        return reshape(out, (t, d)) if squeeze else out


class Block(Module):
    """Pre-norm transformer layer: attention then GLU feed-forward."""

    def __init__(self, config: ModelConfig, rng: np.random.Generator):
        d, f = config.model_dim, config.ffn_latent
        self.act = config.activation
        self.attn_norm = RMSNorm(d, config.norm_eps)
        self.attn = Attention(config, rng)
        self.ffn_norm = RMSNorm(d, config.norm_eps)
        self.w_i = he_init((d, f), d, rng)
        self.w_g = he_init((d, f), d, rng)
        self.w_o = he_init((f, d), f, rng)

    def ffn(self, h: Tensor) -> Tensor:
        return glu_ffn(h, self.w_i, self.w_g, self.w_o, self.act)


class BackboneModel(Module):
    """Token + learned absolute position embeddings, L blocks, untied head."""

    def __init__(self, config: ModelConfig, seed: int = 0):
        rng = np.random.default_rng(seed)
        d = config.model_dim
        self.config = config
        self.tok_emb = Embedding(config.vocab_size, d, rng)
        self.pos_emb = Embedding(config.max_seq_len, d, rng)
        self.layers = [Block(config, rng) for _ in range(config.n_layers)]
        self.final_norm = RMSNorm(d, config.norm_eps)
        self.head = he_init((d, config.vocab_size), d, rng)

    def embed(self, tokens: np.ndarray) -> Tensor:
        """Sum of token and position embeddings for ``tokens[B, T]``.

        Raises:
            ConfigurationError: If T exceeds ``max_seq_len``
            TokenRangeError: If a token is outside the vocabulary
        """
        t = tokens.shape[-1]
        if t > self.config.max_seq_len:
            raise ConfigurationError(
                f"sequence length {t} exceeds max_seq_len {self.config.max_seq_len}"
            )
        positions = np.broadcast_to(np.arange(t), tokens.shape)
        return add(self.tok_emb(tokens), self.pos_emb(positions))

    def project(self, x: Tensor) -> Tensor:
        """Final norm and output head."""
        return matmul(self.final_norm(x), self.head)

    def forward(self, tokens: np.ndarray) -> Tensor:
        """Logits ``[B, T, V]`` for ``tokens[B, T]`` (or ``[T, V]`` for ``[T]``)."""
        tokens = np.asarray(tokens)
        squeeze = tokens.ndim == 1
        if squeeze:
            tokens = tokens[None, :]
        x = self.embed(tokens)
        for block in self.layers:
            x = add(x, block.attn(block.attn_norm(x)))
            x = add(x, block.ffn(block.ffn_norm(x)))
        logits = self.project(x)
        return reshape(logits, logits.shape[1:]) if squeeze else logits

    def logits(self, tokens: np.ndarray) -> np.ndarray:
        """Tape-free logits as a numpy array."""
        return self.forward(tokens).data


def forward_lm(model: BackboneModel, tokens: np.ndarray) -> Tensor:
    """Pre-norm residual stack: ``x += MHA(norm(x)); x += FFN(norm(x))``."""
    return model.forward(tokens)


def mha(block: Block, x: Tensor) -> Tensor:
    """Causal multi-head attention of one block (without its pre-norm)."""
    return block.attn(x)


def expected_param_count(config: ModelConfig) -> int:
    """Closed-form parameter count of a BackboneModel."""
    d, f, v = config.model_dim, config.ffn_latent, config.vocab_size
    per_layer = 4 * d * d + 3 * d * f + 2 * d
    return v * d + config.max_seq_len * d + config.n_layers * per_layer + d + d * v
