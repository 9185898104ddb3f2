"""Held-out perplexity over non-overlapping windows."""

import math
from typing import Protocol

import numpy as np

from nres.data import Corpus
from nres.errors import ContractError
from nres.tensor import token_nll

EVAL_BATCH = 32


class LanguageModel(Protocol):
    def logits(self, tokens: np.ndarray) -> np.ndarray:
        """``[B, T, V]`` scores for ``tokens[B, T]`` without recording a tape."""
        ...


def eval_windows(
    stream: np.ndarray, seq_len: int, max_windows: int | None = None
) -> list[np.ndarray]:
    """Split ``stream`` into consecutive windows of ``seq_len`` tokens.

    A trailing partial window is kept when it holds at least two tokens.
    """
    windows = [
        stream[start : start + seq_len]
        for start in range(0, stream.size, seq_len)
        if stream[start : start + seq_len].size >= 2
    ]
    return windows[:max_windows] if max_windows is not None else windows


def window_nll(model: LanguageModel, windows: list[np.ndarray]) -> tuple[float, int]:
    """Summed next-token NLL over ``windows`` and the number of predictions."""
    total = 0.0
    count = 0
    full = [w for w in windows if w.size == windows[0].size]
    rest = [w for w in windows if w.size != windows[0].size]
    for start in range(0, len(full), EVAL_BATCH):
        batch = np.stack(full[start : start + EVAL_BATCH])
        nll = token_nll(model.logits(batch[:, :-1]), batch[:, 1:])
        total += float(nll.sum())
        count += nll.size
    for window in rest:
        nll = token_nll(model.logits(window[None, :-1]), window[None, 1:])
        total += float(nll.sum())
        count += nll.size
    return total, count


def perplexity(
    model: LanguageModel,
    heldout: Corpus | np.ndarray,
    seq_len: int = 128,
    max_windows: int | None = None,
) -> tuple[float, float]:
    """Mean per-token NLL and ``exp(nll)`` on held-out text.

    Args:
        model: Anything exposing tape-free ``logits``
        heldout: A corpus (its held-out split is used) or a raw token stream
        seq_len: Window length T; each window contributes T-1 predictions
        max_windows: Evaluate only the first windows, for in-loop evaluation

    Raises:
        ContractError: If the held-out stream has fewer than two tokens
    """
    stream = heldout.heldout if isinstance(heldout, Corpus) else np.asarray(heldout)
    if stream.size < 2:
        raise ContractError("held-out set needs at least two tokens")
    total, count = window_nll(model, eval_windows(stream, seq_len, max_windows))
    nll = max(total / count, 0.0)
    return nll, math.exp(nll)
