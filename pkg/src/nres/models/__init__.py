"""Pydantic models for configs and reports."""

from .backbone import ModelConfig
from .base import StrictModel
from .data import (
    CipherSpec,
    CorpusSource,
    DataConfig,
    FileSource,
    Markov2Spec,
    SyntheticLanguageSpec,
)
from .extension import PRESETS, ExtensionConfig, preset, resolve_extension
from .reports import (
    EvalReport,
    LossSnapshot,
    MatrixSpectrum,
    SpectrumReport,
    TradeoffRow,
)
from .run import RunConfig
from .sweep import SweepGrid, SweepPoint
from .training import TrainConfig, default_pretrain_config

__all__ = [
    # Base
    "StrictModel",
    # Architecture
    "ModelConfig",
    # Extension
    "ExtensionConfig",
    "PRESETS",
    "preset",
    "resolve_extension",
    # Data
    "Markov2Spec",
    "CipherSpec",
    "FileSource",
    "SyntheticLanguageSpec",
    "CorpusSource",
    "DataConfig",
    # Training
    "TrainConfig",
    "default_pretrain_config",
    # Run
    "RunConfig",
    "SweepGrid",
    "SweepPoint",
    # Reports
    "LossSnapshot",
    "EvalReport",
    "MatrixSpectrum",
    "SpectrumReport",
    "TradeoffRow",
]
