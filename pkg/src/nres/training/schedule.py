"""Learning-rate schedule: linear warmup, then cosine decay to 10% of peak."""

import math

from nres.errors import ConfigurationError
from nres.models import TrainConfig

FINAL_LR_RATIO = 0.1


def lr_schedule(step: int, cfg: TrainConfig, peak: float | None = None) -> float:
    """Learning rate at ``step``.

    Args:
        step: Value in ``[0, total_steps]``
        cfg: Provides warmup/total steps and, unless ``peak`` is given, the peak
        peak: Peak learning rate overriding ``cfg.lr``

    Raises:
        ConfigurationError: If step is out of range or no peak is known
    """
    peak = peak if peak is not None else cfg.lr
    if peak is None:
        raise ConfigurationError("no peak learning rate configured")
    if not 0 <= step <= cfg.total_steps:
        raise ConfigurationError(
            f"step {step} outside [0, {cfg.total_steps}]"
        )
    if step < cfg.warmup_steps:
        return peak * step / cfg.warmup_steps

    decay_steps = max(cfg.total_steps - cfg.warmup_steps, 1)
    progress = (step - cfg.warmup_steps) / decay_steps
    cosine = 0.5 * (1.0 + math.cos(math.pi * progress))
    return peak * (FINAL_LR_RATIO + (1.0 - FINAL_LR_RATIO) * cosine)
