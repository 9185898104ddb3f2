"""Shared fixtures: tiny models, configs and seeded generators."""

import numpy as np
import pytest

from nres.data import generate_synthetic_corpus
from nres.models import (
    CipherSpec,
    DataConfig,
    Markov2Spec,
    ModelConfig,
    RunConfig,
    TrainConfig,
)
from nres.nn import BackboneModel
from nres.training import Corpora

TINY_SEQ = 16


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_config() -> ModelConfig:
    """Two layers, d=8: small enough for finite-difference checks."""
    return ModelConfig(
        n_layers=2,
        model_dim=8,
        n_heads=2,
        ffn_latent=16,
        vocab_size=256,
        max_seq_len=TINY_SEQ,
    )


@pytest.fixture
def tiny_backbone(tiny_config: ModelConfig) -> BackboneModel:
    return BackboneModel(tiny_config, seed=0)


@pytest.fixture
def desk_config() -> ModelConfig:
    return ModelConfig()


@pytest.fixture
def tiny_train() -> TrainConfig:
    return TrainConfig(
        lr=1e-3,
        warmup_steps=2,
        total_steps=10,
        batch_size=4,
        seq_len=TINY_SEQ,
        eval_interval=5,
        eval_windows=2,
    )


@pytest.fixture
def tiny_corpora() -> Corpora:
    original = generate_synthetic_corpus(Markov2Spec(seed=0), 4000, TINY_SEQ)
    new = generate_synthetic_corpus(CipherSpec(), 4000, TINY_SEQ)
    return Corpora(original=original, new=new)


@pytest.fixture
def tiny_run_config(tiny_config: ModelConfig, tiny_train: TrainConfig) -> RunConfig:
    return RunConfig(
        model=tiny_config,
        pretrain=tiny_train.model_copy(update={"total_steps": 4, "p": 1.0}),
        train=tiny_train,
        data=DataConfig(n_tokens=4000),
    )
