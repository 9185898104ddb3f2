"""Sweep grid file model."""

from itertools import product
from typing import Optional

from pydantic import Field, field_validator

from .base import StrictModel
from .extension import PRESETS, InitScheme
from .run import RunConfig


class SweepPoint(StrictModel):
    """One cell of the cross-product grid."""

    index: int
    preset: str
    lr: Optional[float] = None
    alpha: Optional[float] = None
    p: Optional[float] = None
    budget: Optional[float] = None
    init: Optional[InitScheme] = None

    @property
    def name(self) -> str:
        """Unique run directory name."""
        return f"{self.index:03d}-{self.preset}"


class SweepGrid(StrictModel):
    """Axes of a sweep; an omitted axis keeps the value from ``base``.

    ``method`` takes preset names, which include the plain method names
    ``finetune``, ``lora`` and ``adapter``.
    """

    base: RunConfig = Field(default_factory=RunConfig)
    method: list[str] = Field(
        default_factory=lambda: ["neutral-residues"], min_length=1
    )
    lr: Optional[list[float]] = Field(default=None, min_length=1)
    alpha: Optional[list[float]] = Field(default=None, min_length=1)
    p: Optional[list[float]] = Field(default=None, min_length=1)
    budget: Optional[list[float]] = Field(default=None, min_length=1)
    init: Optional[list[InitScheme]] = Field(default=None, min_length=1)

    @field_validator("method")
    @classmethod
    def check_presets(cls, v: list[str]) -> list[str]:
        unknown = [name for name in v if name not in PRESETS]
        if unknown:
            raise ValueError(
                f"unknown method/preset {unknown} (choose from {', '.join(PRESETS)})"
            )
        return v

    def points(self) -> list[SweepPoint]:
        """Cross product in axis order method, lr, alpha, p, budget, init."""
        axes = product(
            self.method,
            self.lr or [None],
            self.alpha or [None],
            self.p or [None],
            self.budget or [None],
            self.init or [None],
        )
        return [
            SweepPoint(
                index=i, preset=m, lr=lr, alpha=a, p=p, budget=b, init=init
            )
            for i, (m, lr, a, p, b, init) in enumerate(axes)
        ]

    def run_config(self, point: SweepPoint) -> RunConfig:
        """The fully validated RunConfig of one grid point."""
        extension = dict(PRESETS[point.preset])
        base_ext = self.base.extension
        extension["alpha"] = point.alpha if point.alpha is not None else base_ext.alpha
        extension["budget_fraction"] = (
            point.budget if point.budget is not None else base_ext.budget_fraction
        )
        if point.init is not None:
            extension["init_scheme"] = point.init

        data = self.base.model_dump()
        data["extension"] = extension
        data["preset"] = point.preset
        if point.lr is not None:
            data["train"]["lr"] = point.lr
        if point.p is not None:
            data["train"]["p"] = point.p
        return RunConfig.model_validate(data)
