"""Byte-level corpora, synthetic languages and the mixed-batch sampler."""

from nres.data.corpus import Corpus, Domain, fetch_bytes, load_corpus
from nres.data.sampler import BatchSampler, MixedBatch, sample_batch
from nres.data.synthetic import (
    build_corpus,
    cipher_permutation,
    generate_synthetic_corpus,
    transition_table,
)
from nres.data.tokenizer import VOCAB_SIZE, detokenize, tokenize

__all__ = [
    "BatchSampler",
    "Corpus",
    "Domain",
    "MixedBatch",
    "VOCAB_SIZE",
    "build_corpus",
    "cipher_permutation",
    "detokenize",
    "fetch_bytes",
    "generate_synthetic_corpus",
    "load_corpus",
    "sample_batch",
    "tokenize",
    "transition_table",
]
