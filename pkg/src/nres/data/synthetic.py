"""Seeded synthetic languages for desk-scale domain-extension experiments.

Two generator kinds are available:

- ``markov2``: an order-2 character chain over a small alphabet whose
  transition table is drawn from the generator seed. Dividing the transition
  logits by a temperature gives a related language, which is how the
  old-domain proxy corpus is produced.
- ``cipher``: a seeded permutation of all 256 byte values applied to a base
  markov2 corpus, so the result shares its structure but almost none of its
  symbols.
"""

import logging

import numpy as np

from nres.data.corpus import Corpus, Domain, load_corpus
from nres.errors import ConfigurationError
from nres.models import CipherSpec, CorpusSource, FileSource, Markov2Spec

logger = logging.getLogger(__name__)

N_CHAINS = 256


def transition_table(spec: Markov2Spec) -> np.ndarray:
    """Row-stochastic ``[k, k, k]`` table: P(next | previous two symbols)."""
    k = len(spec.alphabet)
    rng = np.random.default_rng(spec.seed)
    logits = rng.normal(0.0, spec.sharpness, size=(k, k, k)) / spec.temperature
    logits -= logits.max(axis=-1, keepdims=True)
    probs = np.exp(logits)
    return probs / probs.sum(axis=-1, keepdims=True)


def _markov2_tokens(spec: Markov2Spec, n_tokens: int) -> np.ndarray:
    table = transition_table(spec)
    k = table.shape[0]
    cdf = np.cumsum(table, axis=-1).reshape(k * k, k)
    # sampling draws come from a stream independent of the table seed
    rng = np.random.default_rng((spec.seed, n_tokens))

    length = -(-n_tokens // N_CHAINS)
    symbols = np.empty((N_CHAINS, length), dtype=np.int64)
    prev2 = rng.integers(0, k, size=N_CHAINS)
    prev1 = rng.integers(0, k, size=N_CHAINS)
    for step in range(length):
        u = rng.random(N_CHAINS)
        rows = cdf[prev2 * k + prev1]
        nxt = np.minimum((rows < u[:, None]).sum(axis=1), k - 1)
        symbols[:, step] = nxt
        prev2, prev1 = prev1, nxt

    alphabet = np.frombuffer(spec.alphabet.encode("latin-1"), dtype=np.uint8)
    return alphabet[symbols.reshape(-1)[:n_tokens]].astype(np.int64)


def cipher_permutation(spec: CipherSpec) -> np.ndarray:
    """The byte permutation of a cipher spec (explicit or drawn from its seed)."""
    if spec.permutation is not None:
        return np.asarray(spec.permutation, dtype=np.int64)
    return np.random.default_rng(spec.seed).permutation(256).astype(np.int64)


def generate_synthetic_corpus(
    spec: Markov2Spec | CipherSpec,
    n_tokens: int,
    seq_len: int = 128,
    domain: Domain | None = None,
    heldout_fraction: float = 0.05,
) -> Corpus:
    """Generate ``n_tokens`` bytes of a synthetic language.

    The same spec always yields the same corpus. ``domain`` defaults to
    ``new`` for cipher specs and ``original`` otherwise.

    Raises:
        ConfigurationError: If ``n_tokens < 10 * seq_len``
    """
    if n_tokens < 10 * seq_len:
        raise ConfigurationError(
            f"n_tokens {n_tokens} is below 10 x seq_len ({10 * seq_len})"
        )
    if isinstance(spec, CipherSpec):
        base = _markov2_tokens(spec.base, n_tokens)
        tokens = cipher_permutation(spec)[base]
        domain = domain or "new"
    else:
        tokens = _markov2_tokens(spec, n_tokens)
        domain = domain or "original"
    logger.debug("Generated %d %s tokens (%s)", n_tokens, spec.kind, domain)
    return Corpus(domain, tokens, heldout_fraction)


def build_corpus(
    source: CorpusSource,
    n_tokens: int,
    seq_len: int,
    domain: Domain,
    heldout_fraction: float = 0.05,
) -> Corpus:
    """Materialize a configured corpus source."""
    if isinstance(source, FileSource):
        corpus = load_corpus(source.location, domain, heldout_fraction)
        if len(corpus) < 10 * seq_len:
            raise ConfigurationError(
                f"corpus {source.location} has {len(corpus)} tokens, "
                f"below 10 x seq_len ({10 * seq_len})"
            )
        return corpus
    return generate_synthetic_corpus(
        source, n_tokens, seq_len, domain, heldout_fraction
    )
