"""Byte-level tokenization: token id == byte value."""

import numpy as np

from nres.errors import TokenRangeError

VOCAB_SIZE = 256


def tokenize(text: bytes | str) -> np.ndarray:
    """Map bytes (or UTF-8 encoded text) to int64 token ids in [0, 256)."""
    if isinstance(text, str):
        text = text.encode("utf-8")
    return np.frombuffer(text, dtype=np.uint8).astype(np.int64)


def detokenize(ids: np.ndarray) -> bytes:
    """Inverse of :func:`tokenize`.

    Raises:
        TokenRangeError: If an id is outside [0, 256)
    """
    ids = np.asarray(ids, dtype=np.int64)
    bad = ids[(ids < 0) | (ids >= VOCAB_SIZE)]
    if bad.size:
        raise TokenRangeError(f"token id {int(bad[0])} is outside [0, {VOCAB_SIZE})")
    return ids.astype(np.uint8).tobytes()
