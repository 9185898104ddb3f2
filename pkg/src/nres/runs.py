"""Run orchestration shared by the commands and sweep workers."""

import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, TypeVar

import yaml
from pydantic import BaseModel

from nres.analysis import (
    METRICS_FILE,
    RUN_FILE,
    perplexity,
    tradeoff_table,
    write_tradeoff_csv,
)
from nres.data import build_corpus
from nres.errors import ConfigurationError
from nres.models import (
    DataConfig,
    EvalReport,
    RunConfig,
    SweepGrid,
    SweepPoint,
    TradeoffRow,
)
from nres.nn import BackboneModel, ExtendedModel, extend
from nres.training import (
    Corpora,
    MetricsWriter,
    load_checkpoint,
    pretrain_backbone,
    read_checkpoint,
    save_checkpoint,
    train_extension,
)

logger = logging.getLogger(__name__)

MODEL_FILE = "model.ckpt"
TRADEOFF_FILE = "tradeoff.csv"

M = TypeVar("M", bound=BaseModel)


def load_document(path: Path | str) -> Any:
    """Parse a JSON or YAML (``.yaml``/``.yml``) file.

    Raises:
        ConfigurationError: If the file is missing or not parseable
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"config file not found: {path}")
    text = path.read_text(encoding="utf-8")
    try:
        if path.suffix.lower() in (".yaml", ".yml"):
            return yaml.safe_load(text) or {}
        return json.loads(text)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigurationError(f"cannot parse {path}: {e}") from e


def load_model(cls: type[M], path: Path | str | None) -> M:
    """Validate a config document into ``cls``; defaults when ``path`` is None.

    Raises:
        ConfigurationError: If the file is missing or not parseable
        pydantic.ValidationError: If a key is unknown or a value invalid
    """
    if path is None:
        return cls()
    return cls.model_validate(load_document(path))


def build_corpora(data: DataConfig, seq_len: int) -> Corpora:
    """Materialize the original, new and (if configured) proxy corpora."""
    original = build_corpus(
        data.original, data.n_tokens, seq_len, "original", data.heldout_fraction
    )
    new = build_corpus(data.new, data.n_tokens, seq_len, "new", data.heldout_fraction)
    proxy = None
    if data.proxy is not None:
        proxy = build_corpus(
            data.proxy, data.n_tokens, seq_len, "original", data.heldout_fraction
        )
    return Corpora(original=original, new=new, proxy=proxy)


def _check_seq_len(config: RunConfig, seq_len: int) -> None:
    if seq_len > config.model.max_seq_len:
        raise ConfigurationError(
            f"seq_len {seq_len} exceeds model max_seq_len {config.model.max_seq_len}"
        )


def write_run_file(config: RunConfig, out_dir: Path) -> Path:
    path = out_dir / RUN_FILE
    path.write_text(config.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path


def run_pretrain(config: RunConfig, out_dir: Path | str) -> Path:
    """Pretrain a backbone on the original corpus; returns the checkpoint path.

    The backbone is initialized from ``config.pretrain.seed``. Old-domain
    batches come from ``original`` itself, never from the proxy.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg = config.pretrain
    _check_seq_len(config, cfg.seq_len)

    corpora = build_corpora(config.data, cfg.seq_len)
    corpora = Corpora(original=corpora.original, new=corpora.new)
    backbone = BackboneModel(config.model, seed=cfg.seed)
    with MetricsWriter(out_dir / METRICS_FILE) as writer:
        for report in pretrain_backbone(backbone, corpora, cfg):
            writer.write(report)
    write_run_file(config, out_dir)
    return save_checkpoint(backbone, out_dir / MODEL_FILE, step=cfg.total_steps)


def load_backbone(path: Path | str) -> BackboneModel:
    """Load a pretrained (not yet extended) backbone checkpoint."""
    model = load_checkpoint(path)
    if isinstance(model, ExtendedModel):
        raise ConfigurationError(f"{path} holds an extended model, not a backbone")
    return model


def run_extension(
    config: RunConfig, backbone_path: Path | str, out_dir: Path | str
) -> Path:
    """Extend a pretrained backbone and train it; returns the checkpoint path.

    The run directory receives ``model.ckpt``, ``metrics.jsonl`` and
    ``run.json`` (the resolved config, with the backbone's model config).
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    backbone = load_backbone(backbone_path)
    config = config.model_copy(update={"model": backbone.config})
    cfg = config.train
    _check_seq_len(config, cfg.seq_len)

    corpora = build_corpora(config.data, cfg.seq_len)
    model = extend(backbone, config.extension, seed=cfg.seed)
    with MetricsWriter(out_dir / METRICS_FILE) as writer:
        for report in train_extension(model, corpora, cfg, lr=config.extension_lr()):
            writer.write(report)
    write_run_file(config, out_dir)
    return save_checkpoint(model, out_dir / MODEL_FILE, step=cfg.total_steps)


def evaluate_checkpoint(
    path: Path | str, config: RunConfig, max_windows: int | None = None
) -> EvalReport:
    """Held-out NLL and perplexity of a checkpoint on both domains."""
    step = read_checkpoint(path).step
    model = load_checkpoint(path)
    model_cfg = model.model_config if isinstance(model, ExtendedModel) else model.config
    seq_len = min(config.train.seq_len, model_cfg.max_seq_len)
    corpora = build_corpora(config.data, seq_len)
    nll_old, _ = perplexity(model, corpora.original, seq_len, max_windows)
    nll_new, _ = perplexity(model, corpora.new, seq_len, max_windows)
    return EvalReport.from_nll(step, nll_old, nll_new)


def _sweep_worker(args: tuple[dict[str, Any], str, str]) -> str:
    config_data, backbone_path, run_dir = args
    run_extension(RunConfig.model_validate(config_data), backbone_path, run_dir)
    return run_dir


def run_sweep(
    grid: SweepGrid,
    backbone_path: Path | str,
    out_dir: Path | str,
    workers: int | None = None,
) -> list[TradeoffRow]:
    """Run every grid point in its own directory, then write the tradeoff table.

    ``workers`` defaults to the CPU count; with one worker runs execute
    sequentially in this process.
    """
    out_dir = Path(out_dir)
    points: list[SweepPoint] = grid.points()
    jobs = [
        (
            grid.run_config(point).model_dump(mode="json"),
            str(backbone_path),
            str(out_dir / "runs" / point.name),
        )
        for point in points
    ]
    workers = min(workers or os.cpu_count() or 1, len(jobs))
    logger.info("Sweeping %d runs with %d worker(s)", len(jobs), workers)

    if workers <= 1:
        run_dirs = [_sweep_worker(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            run_dirs = list(pool.map(_sweep_worker, jobs))

    rows = tradeoff_table(run_dirs)
    write_tradeoff_csv(rows, out_dir / TRADEOFF_FILE)
    return rows
