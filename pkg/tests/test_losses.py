"""Tests for the local losses and the combined objective."""

import math

import numpy as np
import pytest

from nres.data import MixedBatch
from nres.errors import ConfigurationError
from nres.models import preset
from nres.nn import (
    BackboneModel,
    DomainMask,
    ExtendedModel,
    combine,
    extend,
    gate_ce_loss,
    l1_local_loss,
)
from nres.tensor import (
    Tape,
    Tensor,
    max_relative_error,
    precision,
    softmax_cross_entropy,
)
from nres.training import batch_loss

MIXED = DomainMask.from_flags([True, False, True, False])
STEP = 1e-3


def _nonzero_adapters(tiny_config, name: str, seed: int = 5) -> ExtendedModel:
    """Extended tiny model whose adapters already produce strictly positive output.

    With ``A_i = A_g`` every GLU latent is ``silu(z)·z ≥ 0``; a non-negative ``A_o``
    then keeps each output component away from the kink of ``|y|``.
    """
    backbone = BackboneModel(tiny_config, seed=0)
    model = extend(backbone, preset(name, alpha=0.5), seed=1)
    rng = np.random.default_rng(seed)
    for adapter in model.adapters:
        adapter.a_i.data[...] = adapter.a_g.data
        adapter.a_o.data[...] = np.abs(rng.normal(0.0, 0.5, size=adapter.a_o.shape))
        if adapter.gate == "relu":
            # keep every ReLU gate well inside its linear region
            adapter.gate_b.data[...] = 3.0
    return model


class TestL1Loss:
    def test_hand_example(self):
        y = Tensor(np.array([[[1.0, -2.0, 3.0]]]))
        loss = l1_local_loss([y], DomainMask.from_flags([True]), d=3)
        assert loss.item() == pytest.approx(2.0)

    def test_new_domain_tokens_ignored(self):
        y = Tensor(np.array([[[1.0, 1.0]], [[100.0, 100.0]]]))
        loss = l1_local_loss([y], DomainMask.from_flags([True, False]), d=2)
        assert loss.item() == pytest.approx(1.0)

    def test_averages_over_layers(self):
        a = Tensor(np.full((1, 2, 2), 2.0))
        b = Tensor(np.zeros((1, 2, 2)))
        loss = l1_local_loss([a, b], DomainMask.from_flags([True]), d=2)
        assert loss.item() == pytest.approx(1.0)

    def test_all_new_batch_has_zero_gradient(self, tiny_config, rng):
        model = _nonzero_adapters(tiny_config, "neutral-residues")
        tokens = rng.integers(0, 256, size=(3, 6))
        params = [p for _, p in model.trainable_parameters()]
        with Tape() as tape:
            out = model.forward(tokens)
            loss = l1_local_loss(
                out.adapter_outputs, DomainMask.from_flags([False] * 3), 8
            )
        assert loss.item() == 0.0
        grads = tape.backward(loss, params)
        assert all(not np.any(g) for g in grads.values())

    def test_bad_dim(self):
        with pytest.raises(ConfigurationError):
            l1_local_loss([], DomainMask.from_flags([True]), d=0)


class TestGateCrossEntropy:
    def test_half_gates(self):
        g = Tensor(np.full((2, 3, 1), 0.5))
        loss = gate_ce_loss([g], DomainMask.from_flags([True, False]))
        assert loss.item() == pytest.approx(math.log(2.0), rel=1e-6)

    def test_targets_follow_domain(self):
        g = Tensor(np.array([[[0.1]], [[0.9]]]))
        loss = gate_ce_loss([g], DomainMask.from_flags([True, False]))
        assert loss.item() == pytest.approx(-math.log(0.9), rel=1e-5)

    def test_decreases_toward_targets(self):
        mask = DomainMask.from_flags([True, False])
        losses = []
        for shift in np.linspace(0.0, 0.45, 10):
            g = Tensor(np.array([[[0.5 - shift]], [[0.5 + shift]]]))
            losses.append(gate_ce_loss([g], mask).item())
        assert np.all(np.diff(losses) < 0)

    def test_requires_sigmoid(self):
        with pytest.raises(ConfigurationError):
            gate_ce_loss([], DomainMask.from_flags([True]), gate="relu")


class TestCombine:
    def test_weighting(self):
        breakdown = combine(1.0, 2.0, None, alpha=0.01)
        assert breakdown.total.item() == pytest.approx(1.02, rel=1e-6)
        assert breakdown.local_ce.item() == 0.0

    def test_both_local_terms(self):
        breakdown = combine(0.7, 0.3, 0.5, alpha=0.1)
        assert breakdown.total.item() == pytest.approx(0.78, rel=1e-6)

    def test_negative_alpha(self):
        with pytest.raises(ConfigurationError):
            combine(1.0, 0.0, 0.0, alpha=-1.0)

    def test_snapshot(self):
        snap = combine(1.0, 2.0, 3.0, alpha=1.0).snapshot()
        assert (snap.lm_loss, snap.local_l1, snap.local_ce) == (1.0, 2.0, 3.0)
        assert snap.total == pytest.approx(6.0)

    def test_ce_off_on_original_batch(self, tiny_config, rng):
        model = _nonzero_adapters(tiny_config, "neutral-residues")
        tokens = rng.integers(0, 256, size=(2, 6))
        batch = MixedBatch(tokens, DomainMask.from_flags([True, True]))
        assert batch_loss(model, batch).local_ce.item() == 0.0


@pytest.mark.parametrize("name", ["l1-only", "neutral-residues", "sigmoid-ce-l1"])
class TestGradientFidelity:
    """Finite differences (central, h=1e-3) on a 2-layer d=8 model, per gate kind."""

    @pytest.fixture
    def tokens(self) -> np.ndarray:
        return np.random.default_rng(11).integers(0, 256, size=(4, 7))

    @pytest.fixture
    def model(self, tiny_config, tokens, name):
        with precision(np.float64):
            model = _nonzero_adapters(tiny_config, name)
            outputs = model.forward(tokens[:, :-1]).adapter_outputs
            margin = min(float(np.abs(y.data).min()) for y in outputs)
            assert margin > 10 * STEP
            yield model

    def _check(self, model: ExtendedModel, objective) -> None:
        params = [p for _, p in model.trainable_parameters()]
        assert max_relative_error(objective, params, h=STEP) <= 1e-3

    def test_lm_loss(self, model, tokens):
        def objective() -> Tensor:
            logits = model.forward(tokens[:, :-1]).logits
            return softmax_cross_entropy(logits, tokens[:, 1:])

        self._check(model, objective)

    def test_l1_loss(self, model, tokens):
        def objective() -> Tensor:
            out = model.forward(tokens[:, :-1])
            return l1_local_loss(out.adapter_outputs, MIXED, 8)

        self._check(model, objective)

    def test_ce_loss(self, model, tokens, name):
        if name != "sigmoid-ce-l1":
            pytest.skip("gate cross-entropy needs a sigmoid gate")

        def objective() -> Tensor:
            out = model.forward(tokens[:, :-1])
            return gate_ce_loss(out.gate_values, MIXED)

        self._check(model, objective)

    def test_combined(self, model, tokens):
        batch = MixedBatch(tokens, MIXED)
        self._check(model, lambda: batch_loss(model, batch).total)
