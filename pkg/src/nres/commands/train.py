"""Backbone pretraining and extension commands."""

from pathlib import Path
from typing import Optional

import typer
from pydantic import ValidationError
from typing_extensions import Annotated

from nres.commands.common import EXIT_RUNTIME, EXIT_USAGE, fail, validation_message
from nres.errors import FormatError, NresError
from nres.models import RunConfig, TrainConfig, resolve_extension
from nres.runs import load_model, run_extension, run_pretrain


def _override_train(
    cfg: TrainConfig,
    steps: Optional[int] = None,
    seed: Optional[int] = None,
    **values: object,
) -> TrainConfig:
    data = cfg.model_dump()
    if steps is not None:
        data["total_steps"] = steps
        data["warmup_steps"] = min(cfg.warmup_steps, steps)
    if seed is not None:
        data["seed"] = seed
    data.update({k: v for k, v in values.items() if v is not None})
    return TrainConfig.model_validate(data)


def train_backbone(
    config: Annotated[
        Optional[Path],
        typer.Option("--config", "-c", help="Run config file (JSON or YAML)"),
    ] = None,
    out: Annotated[
        Path, typer.Option("--out", "-o", help="Output directory")
    ] = Path("runs/backbone"),
    steps: Annotated[
        Optional[int], typer.Option("--steps", min=0, help="Pretraining steps")
    ] = None,
    seed: Annotated[
        Optional[int],
        typer.Option("--seed", envvar="NRES_SEED", help="Initialization/sampling seed"),
    ] = None,
) -> None:
    """Pretrain the backbone on the original-domain corpus.

    Examples:

      # Desk-scale defaults
      nres train-backbone --out runs/backbone

      # Short smoke run
      nres train-backbone --steps 50 --out /tmp/bb
    """
    try:
        run_config = load_model(RunConfig, config)
        run_config = run_config.model_copy(
            update={"pretrain": _override_train(run_config.pretrain, steps, seed)}
        )
        path = run_pretrain(run_config, out)
        typer.echo(str(path))

    except ValidationError as e:
        fail(f"Invalid configuration: {validation_message(e)}", EXIT_USAGE)
    except (ValueError, FormatError) as e:
        fail(str(e), EXIT_USAGE)
    except NresError as e:
        fail(str(e), EXIT_RUNTIME)
    except Exception as e:
        fail(f"Unexpected error: {e}", EXIT_RUNTIME)


def extend(
    backbone: Annotated[
        Path, typer.Option("--backbone", "-b", help="Pretrained backbone checkpoint")
    ],
    config: Annotated[
        Optional[Path],
        typer.Option("--config", "-c", help="Run config file (JSON or YAML)"),
    ] = None,
    preset: Annotated[
        Optional[str],
        typer.Option("--preset", help="Named extension preset (e.g. neutral-residues)"),
    ] = None,
    method: Annotated[
        Optional[str],
        typer.Option("--method", "-m", help="finetune, lora or adapter"),
    ] = None,
    gate: Annotated[
        Optional[str],
        typer.Option("--gate", help="Adapter block gate: none, sigmoid, relu"),
    ] = None,
    l1: Annotated[
        Optional[bool], typer.Option("--l1/--no-l1", help="l1 local loss")
    ] = None,
    ce: Annotated[
        Optional[bool], typer.Option("--ce/--no-ce", help="Gate cross-entropy loss")
    ] = None,
    alpha: Annotated[
        Optional[float], typer.Option("--alpha", min=0.0, help="Local loss weight")
    ] = None,
    p: Annotated[
        Optional[float],
        typer.Option("--p", min=0.0, max=1.0, help="Original-domain data rate"),
    ] = None,
    lr: Annotated[
        Optional[float], typer.Option("--lr", help="Peak learning rate")
    ] = None,
    budget: Annotated[
        Optional[float],
        typer.Option("--budget", help="Extra parameters as a fraction of the backbone"),
    ] = None,
    init: Annotated[
        Optional[str],
        typer.Option("--init", help="Adapter init: he or low_variance"),
    ] = None,
    steps: Annotated[
        Optional[int], typer.Option("--steps", min=0, help="Training steps")
    ] = None,
    seed: Annotated[
        Optional[int],
        typer.Option("--seed", envvar="NRES_SEED", help="Initialization/sampling seed"),
    ] = None,
    out: Annotated[
        Path, typer.Option("--out", "-o", help="Output directory")
    ] = Path("runs/extend"),
) -> None:
    """Extend a pretrained backbone toward the new domain.

    Examples:

      # Neutral residues defaults
      nres extend -b runs/backbone/model.ckpt --preset neutral-residues

      # The same, spelled out with flags
      nres extend -b model.ckpt --method adapter --gate relu --l1 --alpha 0.01 --p 0.1

      # Vanilla adapters
      nres extend -b model.ckpt --method adapter --gate none --init he
    """
    try:
        run_config = load_model(RunConfig, config)
        extension = resolve_extension(
            run_config.extension,
            preset_name=preset,
            method=method,
            gate=gate,
            use_l1_loss=l1,
            use_ce_loss=ce,
            alpha=alpha,
            budget_fraction=budget,
            init_scheme=init,
        )
        train = _override_train(run_config.train, steps, seed, p=p, lr=lr)
        run_config = RunConfig.model_validate(
            {
                **run_config.model_dump(),
                "extension": extension.model_dump(),
                "train": train.model_dump(),
                "preset": preset if preset is not None else run_config.preset,
            }
        )
        path = run_extension(run_config, backbone, out)
        typer.echo(str(path))

    except ValidationError as e:
        fail(f"Invalid configuration: {validation_message(e)}", EXIT_USAGE)
    except KeyError as e:
        fail(str(e.args[0]), EXIT_USAGE)
    except (ValueError, FormatError) as e:
        fail(str(e), EXIT_USAGE)
    except NresError as e:
        fail(str(e), EXIT_RUNTIME)
    except Exception as e:
        fail(f"Unexpected error: {e}", EXIT_RUNTIME)
