"""Evaluation, spectrum and tradeoff report models."""

import math
from typing import Literal, Optional

from pydantic import BaseModel, Field


class LossSnapshot(BaseModel):
    """Float values of one training step's loss breakdown."""

    lm_loss: float
    local_l1: float = 0.0
    local_ce: float = 0.0
    total: float


class EvalReport(BaseModel):
    """Old/new-domain held-out likelihood at one training step."""

    step: int
    lr: float = 0.0
    nll_old: float = Field(ge=0.0)
    nll_new: float = Field(ge=0.0)
    ppl_old: float
    ppl_new: float
    lm_loss: Optional[float] = None
    local_l1: Optional[float] = None
    local_ce: Optional[float] = None

    @classmethod
    def from_nll(
        cls,
        step: int,
        nll_old: float,
        nll_new: float,
        lr: float = 0.0,
        losses: Optional[LossSnapshot] = None,
    ) -> "EvalReport":
        """Build a report whose perplexities are exactly exp(nll)."""
        return cls(
            step=step,
            lr=lr,
            nll_old=nll_old,
            nll_new=nll_new,
            ppl_old=math.exp(nll_old),
            ppl_new=math.exp(nll_new),
            lm_loss=losses.lm_loss if losses else None,
            local_l1=losses.local_l1 if losses else None,
            local_ce=losses.local_ce if losses else None,
        )


class MatrixSpectrum(BaseModel):
    """Normalized singular values of one gating matrix."""

    owner: Literal["backbone", "adapter"]
    layer: int
    values: list[float]
    skewness: float
    zero_matrix: bool = False

    def format_head(self, n: int = 4) -> str:
        """Get the leading normalized values as text."""
        head = ", ".join(f"{v:.3f}" for v in self.values[:n])
        return head + (", ..." if len(self.values) > n else "")


class SpectrumReport(BaseModel):
    """Spectra of every W_g / A_g in a model.

    ``skewness`` is this package's scalar summary (1 - mean normalized value),
    not a quantity taken from elsewhere.
    """

    matrices: list[MatrixSpectrum] = Field(default_factory=list)

    def mean_skewness(self, owner: str) -> Optional[float]:
        """Mean skewness over nonzero matrices of one owner."""
        values = [
            m.skewness for m in self.matrices if m.owner == owner and not m.zero_matrix
        ]
        return sum(values) / len(values) if values else None


class TradeoffRow(BaseModel):
    """Final evaluation of one run in a sweep."""

    method: str
    lr: float
    p: float
    alpha: float
    budget: float
    nll_old: float
    nll_new: float
    run: str = ""
