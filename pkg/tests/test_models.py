"""Tests for config models, presets and sweep grids."""

import pytest
from pydantic import ValidationError

from nres.models import (
    PRESETS,
    CipherSpec,
    DataConfig,
    ExtensionConfig,
    FileSource,
    Markov2Spec,
    ModelConfig,
    RunConfig,
    SweepGrid,
    TrainConfig,
    default_pretrain_config,
    preset,
    resolve_extension,
)


class TestPresets:
    @pytest.mark.parametrize("name", list(PRESETS))
    def test_every_preset_validates(self, name):
        assert isinstance(preset(name), ExtensionConfig)

    def test_neutral_residues(self):
        cfg = preset("neutral-residues")
        assert (cfg.method, cfg.gate, cfg.use_l1_loss, cfg.use_ce_loss) == (
            "adapter",
            "relu",
            True,
            False,
        )
        assert cfg.init_scheme == "low_variance"

    def test_vanilla_adapter_uses_he(self):
        assert preset("adapter").init_scheme == "he"

    def test_override(self):
        assert preset("neutral-residues", alpha=0.1).alpha == 0.1

    def test_unknown(self):
        with pytest.raises(KeyError, match="Unknown preset"):
            preset("mixture")

    def test_default_lr_by_method(self):
        assert preset("adapter").default_lr == 2e-4
        assert preset("finetune").default_lr == 5e-5


class TestResolveExtension:
    def test_defaults_pass_through(self):
        base = ExtensionConfig()
        assert resolve_extension(base) == base

    def test_preset_keeps_base_alpha_and_budget(self):
        base = ExtensionConfig(alpha=0.3, budget_fraction=0.1)
        cfg = resolve_extension(base, preset_name="lora")
        assert cfg.method == "lora"
        assert (cfg.alpha, cfg.budget_fraction) == (0.3, 0.1)

    def test_bare_adapter_method(self):
        cfg = resolve_extension(ExtensionConfig(), method="adapter")
        assert cfg.gate == "none"
        assert not cfg.use_l1_loss
        assert cfg.init_scheme == "he"

    def test_method_with_gate_uses_low_variance(self):
        cfg = resolve_extension(
            ExtensionConfig(), method="adapter", gate="sigmoid", use_ce_loss=True
        )
        assert cfg.init_scheme == "low_variance"
        assert cfg.use_ce_loss

    def test_explicit_init_wins(self):
        cfg = resolve_extension(
            ExtensionConfig(), method="adapter", gate="relu", init_scheme="he"
        )
        assert cfg.init_scheme == "he"

    def test_flag_on_preset(self):
        cfg = resolve_extension(
            ExtensionConfig(), preset_name="neutral-residues", use_l1_loss=False
        )
        assert cfg.gate == "relu"
        assert not cfg.use_l1_loss

    def test_preset_and_method_rejected(self):
        with pytest.raises(ValueError, match="drop --method adapter"):
            resolve_extension(ExtensionConfig(), preset_name="lora", method="adapter")

    def test_contradiction_rejected(self):
        with pytest.raises(ValidationError):
            resolve_extension(ExtensionConfig(), method="lora", gate="relu")

    def test_ce_with_relu_rejected(self):
        with pytest.raises(ValidationError, match="sigmoid"):
            resolve_extension(
                ExtensionConfig(), preset_name="neutral-residues", use_ce_loss=True
            )


class TestConfigs:
    def test_unknown_key_rejected(self):
        with pytest.raises(ValidationError):
            RunConfig.model_validate({"train": {"learning_rate": 1e-3}})

    def test_heads_must_divide_dim(self):
        with pytest.raises(ValidationError, match="divisible"):
            ModelConfig(model_dim=10, n_heads=4)

    def test_desk_step_defaults(self):
        pretrain, train = default_pretrain_config(), TrainConfig()
        assert (pretrain.total_steps, train.total_steps) == (2000, 600)
        assert (train.batch_size, train.seq_len) == (16, 128)

    def test_warmup_not_beyond_total(self):
        with pytest.raises(ValidationError, match="warmup"):
            TrainConfig(warmup_steps=20, total_steps=10)

    def test_p_range(self):
        with pytest.raises(ValidationError):
            TrainConfig(p=1.5)

    def test_extension_lr_fallback(self):
        config = RunConfig(extension=preset("lora"))
        assert config.extension_lr() == 5e-5
        config = RunConfig(train=TrainConfig(lr=1e-3))
        assert config.extension_lr() == 1e-3

    def test_proxy_fill(self):
        data = DataConfig(original=Markov2Spec(seed=7), proxy_temperature=2.0)
        assert data.proxy == Markov2Spec(seed=7, temperature=2.0)

    def test_file_original_has_no_proxy(self):
        data = DataConfig(original=FileSource(location="a.txt"))
        assert data.proxy is None
        assert data.proxy_source() == data.original

    def test_source_discriminator(self):
        data = DataConfig.model_validate(
            {"new": {"kind": "cipher", "seed": 4}, "original": {"kind": "markov2"}}
        )
        assert isinstance(data.new, CipherSpec)
        assert data.new.seed == 4

    def test_bad_permutation(self):
        with pytest.raises(ValidationError):
            CipherSpec(permutation=[0, 1, 2])

    def test_run_config_round_trips_through_json(self):
        config = RunConfig(preset="lora", extension=preset("lora"))
        assert RunConfig.model_validate_json(config.model_dump_json()) == config


class TestSweepGrid:
    def test_point_count(self):
        grid = SweepGrid(
            method=["lora", "neutral-residues"], lr=[1e-5, 5e-5, 1e-4, 2e-4]
        )
        points = grid.points()
        assert len(points) == 8
        assert [p.index for p in points] == list(range(8))
        assert len({p.name for p in points}) == 8

    def test_default_single_point(self):
        (point,) = SweepGrid().points()
        assert point.preset == "neutral-residues"

    def test_run_config(self):
        base = RunConfig(train=TrainConfig(total_steps=50, warmup_steps=5))
        grid = SweepGrid(base=base, method=["lora"], lr=[3e-4], p=[0.0])
        (point,) = grid.points()
        config = grid.run_config(point)
        assert config.preset == "lora"
        assert config.extension.method == "lora"
        assert config.train.lr == 3e-4
        assert config.train.p == 0.0
        assert config.train.total_steps == 50

    def test_axes_override_base(self):
        grid = SweepGrid(method=["neutral-residues"], alpha=[0.5], budget=[0.1])
        config = grid.run_config(grid.points()[0])
        assert config.extension.alpha == 0.5
        assert config.extension.budget_fraction == 0.1

    def test_unknown_method(self):
        with pytest.raises(ValidationError, match="unknown method"):
            SweepGrid(method=["prefix-tuning"])
