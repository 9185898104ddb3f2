"""Extension strategy configuration and named presets."""

from typing import Literal

from pydantic import Field, model_validator

from .base import StrictModel

Method = Literal["finetune", "lora", "adapter"]
GateKind = Literal["none", "sigmoid", "relu"]
InitScheme = Literal["he", "low_variance"]


class ExtensionConfig(StrictModel):
    """How the backbone is extended and which local losses train it."""

    method: Method = "adapter"
    gate: GateKind = "relu"
    use_l1_loss: bool = True
    use_ce_loss: bool = False
    alpha: float = Field(default=0.01, ge=0.0)
    budget_fraction: float = Field(default=0.2, gt=0.0, le=1.0)
    init_scheme: InitScheme = "low_variance"

    @model_validator(mode="after")
    def check_combination(self) -> "ExtensionConfig":
        if self.method != "adapter":
            if self.gate != "none":
                raise ValueError(f"method '{self.method}' cannot use a block gate")
            if self.use_l1_loss or self.use_ce_loss:
                raise ValueError(
                    f"method '{self.method}' has no adapter outputs for local losses"
                )
        if self.use_ce_loss and self.gate != "sigmoid":
            raise ValueError("the cross-entropy gate loss requires gate 'sigmoid'")
        return self

    @property
    def default_lr(self) -> float:
        """Peak learning rate used when none is configured."""
        return 2e-4 if self.method == "adapter" else 5e-5


PRESETS: dict[str, dict[str, object]] = {
    "finetune": dict(method="finetune", gate="none", use_l1_loss=False),
    "lora": dict(method="lora", gate="none", use_l1_loss=False),
    # Vanilla parallel adapters: zero output matrix, He init elsewhere.
    "adapter": dict(
        method="adapter", gate="none", use_l1_loss=False, init_scheme="he"
    ),
    "neutral-residues": dict(
        method="adapter", gate="relu", use_l1_loss=True, init_scheme="low_variance"
    ),
    # Gating / local-loss ablation rows.
    "l1-only": dict(method="adapter", gate="none", use_l1_loss=True),
    "sigmoid-ce": dict(
        method="adapter", gate="sigmoid", use_l1_loss=False, use_ce_loss=True
    ),
    "sigmoid-ce-l1": dict(
        method="adapter", gate="sigmoid", use_l1_loss=True, use_ce_loss=True
    ),
    "relu": dict(method="adapter", gate="relu", use_l1_loss=False),
}


def preset(name: str, **overrides: object) -> ExtensionConfig:
    """Build the ExtensionConfig of a named preset.

    Raises:
        KeyError: If the preset is unknown
    """
    if name not in PRESETS:
        raise KeyError(f"Unknown preset '{name}' (choose from {', '.join(PRESETS)})")
    return ExtensionConfig(**{**PRESETS[name], **overrides})


def resolve_extension(
    base: ExtensionConfig,
    preset_name: str | None = None,
    method: Method | None = None,
    gate: GateKind | None = None,
    use_l1_loss: bool | None = None,
    use_ce_loss: bool | None = None,
    alpha: float | None = None,
    budget_fraction: float | None = None,
    init_scheme: InitScheme | None = None,
) -> ExtensionConfig:
    """Combine a base config, an optional preset and explicit overrides.

    A preset replaces the strategy fields of ``base``. A bare ``method``
    starts from an ungated adapter with no local losses; its init defaults
    to ``he`` for that plain adapter and ``low_variance`` as soon as a gate or
    local loss is requested. ``alpha`` and ``budget_fraction`` keep the base
    values unless overridden.

    Raises:
        KeyError: If the preset is unknown
        ValueError: If both a preset and a method are given
        pydantic.ValidationError: If the combination is contradictory
    """
    if preset_name is not None and method is not None:
        raise ValueError(
            f"--preset {preset_name} already fixes the method; drop --method {method}"
        )
    values: dict[str, object] = base.model_dump()
    if preset_name is not None:
        if preset_name not in PRESETS:
            raise KeyError(
                f"Unknown preset '{preset_name}' (choose from {', '.join(PRESETS)})"
            )
        values.update(init_scheme="low_variance", use_ce_loss=False)
        values.update(PRESETS[preset_name])
    elif method is not None:
        values.update(
            method=method, gate="none", use_l1_loss=False, use_ce_loss=False
        )

    overrides = dict(
        gate=gate,
        use_l1_loss=use_l1_loss,
        use_ce_loss=use_ce_loss,
        alpha=alpha,
        budget_fraction=budget_fraction,
        init_scheme=init_scheme,
    )
    values.update({k: v for k, v in overrides.items() if v is not None})

    if preset_name is None and method is not None and init_scheme is None:
        neutral = (
            values["gate"] != "none" or values["use_l1_loss"] or values["use_ce_loss"]
        )
        values["init_scheme"] = "low_variance" if neutral else "he"
    return ExtensionConfig(**values)
