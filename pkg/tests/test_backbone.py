"""Tests for the GLU transformer backbone and parameter containers."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from nres.errors import ConfigurationError, DimensionError, TokenRangeError
from nres.models import ModelConfig
from nres.nn import (
    Attention,
    BackboneModel,
    count_params,
    expected_param_count,
    forward_lm,
    glu_ffn,
    he_init,
    he_variance,
    mha,
)
from nres.tensor import Tensor, max_relative_error, precision, softmax_cross_entropy

# logits of tokens (3, 4) and (-4, 3) after RMS norm, through a 2x4 head
GOLDEN_LOGITS = [
    [0.848528, 1.131371, 1.979899, 0.282843],
    [-1.131371, 0.848528, -0.282843, 1.979899],
]


class TestConfig:
    def test_heads_must_divide_dim(self):
        with pytest.raises(ValueError):
            ModelConfig(model_dim=10, n_heads=4)

    def test_desk_parameter_count(self, desk_config):
        assert expected_param_count(desk_config) == 141_632
        assert count_params(BackboneModel(desk_config)) == 141_632


class TestForward:
    def test_logit_shapes(self, tiny_backbone, rng):
        tokens = rng.integers(0, 256, size=(3, 10))
        assert forward_lm(tiny_backbone, tokens).shape == (3, 10, 256)
        assert tiny_backbone.forward(tokens[0]).shape == (10, 256)

    def test_too_long_sequence(self, tiny_backbone):
        with pytest.raises(ConfigurationError, match="max_seq_len"):
            tiny_backbone.forward(np.zeros((1, 17), dtype=np.int64))

    def test_token_out_of_range(self, tiny_backbone):
        with pytest.raises(TokenRangeError):
            tiny_backbone.forward(np.array([[1, 256]]))

    def test_causality(self, tiny_backbone, rng):
        tokens = rng.integers(0, 256, size=(1, 8))
        changed = tokens.copy()
        changed[0, -1] = (changed[0, -1] + 1) % 256
        a = tiny_backbone.logits(tokens)
        b = tiny_backbone.logits(changed)
        assert_array_equal(a[0, :-1], b[0, :-1])

    def test_mha_shape(self, tiny_backbone, rng):
        x = Tensor(rng.normal(size=(2, 5, 8)))
        assert mha(tiny_backbone.layers[0], x).shape == (2, 5, 8)

    def test_mha_hand_oracle(self):
        config = ModelConfig(
            n_layers=1, model_dim=2, n_heads=1, ffn_latent=2, max_seq_len=2
        )
        attn = Attention(config, np.random.default_rng(0))
        attn.w_q.data[...] = np.eye(2)
        attn.w_k.data[...] = np.eye(2)
        attn.w_v.data[...] = [[1.0, 2.0], [3.0, 4.0]]
        attn.w_o.data[...] = np.eye(2)
        out = attn(Tensor(np.eye(2)))
        # position 1 scores 0 against key 0 and 1/sqrt(2) against itself
        w1 = 1.0 / (1.0 + math.exp(-1.0 / math.sqrt(2.0)))
        expected = [[1.0, 2.0], [1.0 + 2.0 * w1, 2.0 + 2.0 * w1]]
        assert_allclose(out.data, expected, rtol=1e-5)

    def test_golden_logits(self):
        config = ModelConfig(
            n_layers=1,
            model_dim=2,
            n_heads=1,
            ffn_latent=2,
            vocab_size=4,
            max_seq_len=2,
        )
        model = BackboneModel(config, seed=0)
        model.layers[0].attn.w_o.data[...] = 0.0
        model.layers[0].w_o.data[...] = 0.0
        model.pos_emb.weight.data[...] = 0.0
        model.tok_emb.weight.data[:2] = [[3.0, 4.0], [-4.0, 3.0]]
        model.head.data[...] = [[1.0, 0.0, 1.0, -1.0], [0.0, 1.0, 1.0, 1.0]]
        logits = forward_lm(model, np.array([[0, 1]]))
        assert_allclose(logits.data[0], GOLDEN_LOGITS, rtol=1e-5)

    def test_logits_constant_when_only_head_is_set(self, tiny_config, rng):
        model = BackboneModel(tiny_config, seed=0)
        for name, param in model.named_parameters():
            if name != "head":
                param.data[...] = 0.0
        logits = model.logits(rng.integers(0, 256, size=(2, 6)))
        assert_array_equal(logits, np.broadcast_to(logits[:, :1], logits.shape))

    def test_logits_regenerate_bit_identically(self, tiny_config, rng):
        tokens = rng.integers(0, 256, size=(2, 9))
        first = forward_lm(BackboneModel(tiny_config, seed=5), tokens).data
        second = forward_lm(BackboneModel(tiny_config, seed=5), tokens).data
        assert first.tobytes() == second.tobytes()

    def test_glu_matches_reference(self, rng):
        x = rng.normal(size=(4, 3))
        w_i, w_g = rng.normal(size=(3, 5)), rng.normal(size=(3, 5))
        w_o = rng.normal(size=(5, 3))
        gate = x @ w_g
        expected = (gate / (1.0 + np.exp(-gate)) * (x @ w_i)) @ w_o
        out = glu_ffn(Tensor(x), Tensor(w_i), Tensor(w_g), Tensor(w_o), "silu")
        assert_allclose(out.data, expected, rtol=1e-4, atol=1e-5)

    def test_seed_determinism(self, tiny_config):
        a = BackboneModel(tiny_config, seed=3).state_dict()
        b = BackboneModel(tiny_config, seed=3).state_dict()
        c = BackboneModel(tiny_config, seed=4).state_dict()
        assert all(np.array_equal(a[k], b[k]) for k in a)
        assert not np.array_equal(a["head"], c["head"])

    def test_gelu_backbone(self, tiny_config, rng):
        config = tiny_config.model_copy(update={"activation": "gelu"})
        logits = BackboneModel(config).logits(rng.integers(0, 256, size=(1, 4)))
        assert np.all(np.isfinite(logits))


class TestInit:
    def test_he_variance(self):
        w = he_init((400, 400), 400, np.random.default_rng(0))
        assert w.data.var() == pytest.approx(2.0 / 400, rel=0.05)

    def test_he_million_draws(self):
        assert he_variance(2048) == pytest.approx(9.765625e-4, rel=1e-12)
        w = he_init((1000, 1000), 2048, np.random.default_rng(0)).data
        w = w.astype(np.float64)
        variance = he_variance(2048)
        assert abs(w.mean()) < 4 * math.sqrt(variance / w.size)
        assert w.var() == pytest.approx(variance, rel=4 * math.sqrt(2 / w.size))

    def test_he_seeded(self):
        a = he_init((3, 3), 3, np.random.default_rng(9))
        b = he_init((3, 3), 3, np.random.default_rng(9))
        assert_array_equal(a.data, b.data)

    def test_he_rejects_bad_fan_in(self):
        with pytest.raises(ConfigurationError):
            he_init((2, 2), 0, np.random.default_rng(0))


class TestStateDict:
    def test_roundtrip(self, tiny_config):
        source = BackboneModel(tiny_config, seed=1)
        target = BackboneModel(tiny_config, seed=2)
        target.load_state_dict(source.state_dict())
        for name, value in source.state_dict().items():
            assert_array_equal(target.state_dict()[name], value)

    def test_missing_names(self, tiny_backbone):
        state = tiny_backbone.state_dict()
        state.pop("head")
        with pytest.raises(ConfigurationError, match="head"):
            tiny_backbone.load_state_dict(state)

    def test_shape_mismatch(self, tiny_backbone):
        state = tiny_backbone.state_dict()
        state["head"] = np.zeros((2, 2), dtype=np.float32)
        with pytest.raises(DimensionError):
            tiny_backbone.load_state_dict(state)

    def test_freeze(self, tiny_backbone):
        tiny_backbone.freeze()
        assert count_params(tiny_backbone, trainable_only=True) == 0
        tiny_backbone.unfreeze()
        assert count_params(tiny_backbone, trainable_only=True) == count_params(
            tiny_backbone
        )


def test_lm_loss_gradients(tiny_config, rng):
    with precision(np.float64):
        model = BackboneModel(tiny_config, seed=0)
        # embeddings of order 1, like the other weights
        for table in (model.tok_emb.weight, model.pos_emb.weight):
            table.data[...] = rng.uniform(-1.0, 1.0, size=table.shape)
        tokens = rng.integers(0, 256, size=(2, 7))

        def objective() -> Tensor:
            return softmax_cross_entropy(model.forward(tokens[:, :-1]), tokens[:, 1:])

        assert max_relative_error(objective, model.parameters()) <= 1e-3
