"""p-mixture batch sampling over an original and a new corpus."""

from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np

from nres.data.corpus import Corpus
from nres.errors import ConfigurationError
from nres.nn.losses import DomainMask


@dataclass(frozen=True)
class MixedBatch:
    """``sequences[B, T]`` of byte ids, each drawn whole from one corpus."""

    sequences: np.ndarray
    mask: DomainMask

    @property
    def inputs(self) -> np.ndarray:
        return self.sequences[:, :-1]

    @property
    def targets(self) -> np.ndarray:
        return self.sequences[:, 1:]


def _windows(stream: np.ndarray, offsets: np.ndarray, length: int) -> np.ndarray:
    return stream[offsets[:, None] + np.arange(length)[None, :]]


def sample_batch(
    original: Corpus,
    new: Corpus,
    p: float,
    batch_size: int,
    seq_len: int,
    rng: np.random.Generator,
) -> MixedBatch:
    """Draw B windows of length T from the training splits.

    Each window independently comes from ``original`` with probability ``p``
    and from ``new`` otherwise, at a uniformly random offset.

    Raises:
        ConfigurationError: If ``p`` is outside [0, 1] or a training split is
            shorter than ``seq_len``
    """
    if not 0.0 <= p <= 1.0:
        raise ConfigurationError(f"p must be in [0, 1], got {p}")
    for corpus in (original, new):
        if corpus.train.size < seq_len:
            raise ConfigurationError(
                f"{corpus.domain} corpus has {corpus.train.size} training tokens, "
                f"fewer than seq_len {seq_len}"
            )

    flags = rng.random(batch_size) < p
    old_offsets = rng.integers(0, original.train.size - seq_len + 1, size=batch_size)
    new_offsets = rng.integers(0, new.train.size - seq_len + 1, size=batch_size)
    sequences = np.where(
        flags[:, None],
        _windows(original.train, old_offsets, seq_len),
        _windows(new.train, new_offsets, seq_len),
    )
    return MixedBatch(sequences, DomainMask(flags))


class BatchSampler:
    """Iterator of mixed batches owning its seeded generator."""

    def __init__(
        self,
        original: Corpus,
        new: Corpus,
        p: float,
        batch_size: int,
        seq_len: int,
        seed: int = 0,
    ):
        self.original = original
        self.new = new
        self.p = p
        self.batch_size = batch_size
        self.seq_len = seq_len
        self.rng = np.random.default_rng(seed)

    def __iter__(self) -> Iterator[MixedBatch]:
        return self

    def __next__(self) -> MixedBatch:
        return sample_batch(
            self.original,
            self.new,
            self.p,
            self.batch_size,
            self.seq_len,
            self.rng,
        )
