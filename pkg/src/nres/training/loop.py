"""Pretraining and extension training loops."""

import logging
import math
from collections.abc import Iterator
from dataclasses import dataclass
from pathlib import Path
from types import TracebackType

from nres.analysis.perplexity import perplexity
from nres.data import BatchSampler, Corpus, MixedBatch
from nres.errors import ConfigurationError, NumericError
from nres.models import EvalReport, ExtensionConfig, LossSnapshot, TrainConfig
from nres.nn import (
    BackboneModel,
    ExtendedModel,
    LossBreakdown,
    combine,
    gate_ce_loss,
    l1_local_loss,
)
from nres.tensor import Tape, softmax_cross_entropy
from nres.training.optim import AdamW, check_finite, clip_grad_norm
from nres.training.schedule import lr_schedule

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Corpora:
    """Corpora of one experiment.

    ``original`` provides the old-domain held-out set; old-domain training
    sequences come from ``proxy`` when given.
    """

    original: Corpus
    new: Corpus
    proxy: Corpus | None = None

    @property
    def train_original(self) -> Corpus:
        return self.proxy if self.proxy is not None else self.original


def batch_loss(
    model: BackboneModel | ExtendedModel, batch: MixedBatch
) -> LossBreakdown:
    """LM loss on the batch plus the configured local losses.

    Must run inside a Tape for gradients to be available.
    """
    if isinstance(model, BackboneModel):
        lm = softmax_cross_entropy(model.forward(batch.inputs), batch.targets)
        return combine(lm, None, None, 0.0)

    cfg: ExtensionConfig = model.config
    out = model.forward(batch.inputs)
    lm = softmax_cross_entropy(out.logits, batch.targets)
    l1 = (
        l1_local_loss(out.adapter_outputs, batch.mask, model.model_config.model_dim)
        if cfg.use_l1_loss
        else None
    )
    ce = (
        gate_ce_loss(out.gate_values, batch.mask, cfg.gate)
        if cfg.use_ce_loss
        else None
    )
    return combine(lm, l1, ce, cfg.alpha)


def evaluate(
    model: BackboneModel | ExtendedModel,
    corpora: Corpora,
    cfg: TrainConfig,
    step: int,
    lr: float = 0.0,
    losses: LossSnapshot | None = None,
) -> EvalReport:
    """Held-out NLL on both domains, capped at ``cfg.eval_windows`` windows."""
    nll_old, _ = perplexity(model, corpora.original, cfg.seq_len, cfg.eval_windows)
    nll_new, _ = perplexity(model, corpora.new, cfg.seq_len, cfg.eval_windows)
    return EvalReport.from_nll(step, nll_old, nll_new, lr=lr, losses=losses)


def _run(
    model: BackboneModel | ExtendedModel,
    corpora: Corpora,
    cfg: TrainConfig,
    peak: float,
) -> Iterator[EvalReport]:
    params = model.trainable_parameters()
    optimizer = AdamW(params, cfg.beta1, cfg.beta2, cfg.eps, cfg.weight_decay)
    sampler = BatchSampler(
        corpora.train_original,
        corpora.new,
        cfg.p,
        cfg.batch_size,
        cfg.seq_len,
        cfg.seed,
    )
    logger.debug(
        "Training %d tensors for %d steps at peak lr %g",
        len(params),
        cfg.total_steps,
        peak,
    )

    for step in range(cfg.total_steps):
        batch = next(sampler)
        with Tape() as tape:
            breakdown = batch_loss(model, batch)
        snapshot = breakdown.snapshot()
        if not math.isfinite(snapshot.total):
            raise NumericError(
                f"non-finite loss at step {step}: "
                f"lm={snapshot.lm_loss} l1={snapshot.local_l1} ce={snapshot.local_ce}"
            )

        by_tensor = tape.backward(breakdown.total, [p for _, p in params])
        grads = {name: by_tensor[p] for name, p in params}
        check_finite(grads)
        clip_grad_norm(grads, cfg.grad_clip)
        lr = lr_schedule(step + 1, cfg, peak)
        optimizer.step(grads, lr)

        done = step + 1
        if done % cfg.eval_interval == 0 or done == cfg.total_steps:
            report = evaluate(model, corpora, cfg, done, lr, snapshot)
            logger.info(
                "step %d  lr %.2e  loss %.4f  nll_old %.4f  nll_new %.4f",
                done,
                lr,
                snapshot.total,
                report.nll_old,
                report.nll_new,
            )
            yield report


def train_extension(
    model: ExtendedModel,
    corpora: Corpora,
    cfg: TrainConfig,
    lr: float | None = None,
) -> Iterator[EvalReport]:
    """Train the extension, yielding an EvalReport every ``eval_interval`` steps.

    A fresh optimizer state is created for the trainable parameters only; the
    final step always produces a report. ``total_steps=0`` yields nothing.

    Raises:
        NumericError: On a non-finite loss or gradient
    """
    peak = lr if lr is not None else (cfg.lr or model.config.default_lr)
    logger.info(
        "Extending with %s (gate %s, p=%g, alpha=%g)",
        model.config.method,
        model.config.gate,
        cfg.p,
        model.config.alpha,
    )
    yield from _run(model, corpora, cfg, peak)


def pretrain_backbone(
    backbone: BackboneModel, corpora: Corpora, cfg: TrainConfig
) -> Iterator[EvalReport]:
    """Train every backbone parameter, drawing with ``cfg.p`` from the original corpus.

    Raises:
        ConfigurationError: If ``cfg.lr`` is unset
    """
    if cfg.lr is None:
        raise ConfigurationError("pretraining needs an explicit learning rate")
    backbone.unfreeze()
    logger.info("Pretraining backbone for %d steps", cfg.total_steps)
    yield from _run(backbone, corpora, cfg, cfg.lr)


class MetricsWriter:
    """Write EvalReports to a fresh JSONL file, one object per line."""

    def __init__(self, path: Path | str):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._handle = self.path.open("w", encoding="utf-8")

    def write(self, report: EvalReport) -> None:
        self._handle.write(report.model_dump_json() + "\n")
        self._handle.flush()

    def close(self) -> None:
        self._handle.close()

    def __enter__(self) -> "MetricsWriter":
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc: BaseException | None,
        tb: TracebackType | None,
    ) -> None:
        self.close()
