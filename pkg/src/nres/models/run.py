"""Top-level run configuration file."""

from typing import Optional

from pydantic import Field

from .backbone import ModelConfig
from .base import StrictModel
from .data import DataConfig
from .extension import ExtensionConfig
from .training import TrainConfig, default_pretrain_config


class RunConfig(StrictModel):
    """Everything a command needs; every key is optional.

    ``preset`` names the ExtensionConfig preset a run was built from, if any.
    """

    model: ModelConfig = Field(default_factory=ModelConfig)
    extension: ExtensionConfig = Field(default_factory=ExtensionConfig)
    pretrain: TrainConfig = Field(default_factory=default_pretrain_config)
    train: TrainConfig = Field(default_factory=TrainConfig)
    data: DataConfig = Field(default_factory=DataConfig)
    preset: Optional[str] = None

    def extension_lr(self) -> float:
        """Peak extension learning rate, falling back to the method default."""
        return self.train.lr if self.train.lr is not None else self.extension.default_lr
