"""Corpus source descriptions."""

from typing import Annotated, Literal, Optional, Union

from pydantic import Field, field_validator, model_validator

from .base import StrictModel

DEFAULT_ALPHABET = "abcdefghijklmnopqrstuvwxyz .,;'\n"


class Markov2Spec(StrictModel):
    """Order-2 character chain with a seeded transition table.

    ``temperature`` divides the transition logits; the same seed with another
    temperature gives a related but different distribution.
    """

    kind: Literal["markov2"] = "markov2"
    seed: int = 0
    temperature: float = Field(default=1.0, gt=0.0)
    sharpness: float = Field(default=2.5, gt=0.0)
    alphabet: str = Field(default=DEFAULT_ALPHABET, min_length=2)

    @field_validator("alphabet")
    @classmethod
    def check_alphabet(cls, v: str) -> str:
        if len(set(v)) != len(v):
            raise ValueError("alphabet characters must be distinct")
        if any(ord(c) > 255 for c in v):
            raise ValueError("alphabet must use single-byte characters")
        return v


class CipherSpec(StrictModel):
    """Seeded byte permutation applied to a base generated corpus."""

    kind: Literal["cipher"] = "cipher"
    seed: int = 1
    base: Markov2Spec = Field(default_factory=lambda: Markov2Spec(seed=1))
    permutation: Optional[list[int]] = None

    @field_validator("permutation")
    @classmethod
    def check_permutation(cls, v: Optional[list[int]]) -> Optional[list[int]]:
        if v is not None and sorted(v) != list(range(256)):
            raise ValueError("permutation must reorder all 256 byte values")
        return v


SyntheticLanguageSpec = Annotated[
    Union[Markov2Spec, CipherSpec], Field(discriminator="kind")
]


class FileSource(StrictModel):
    """Plain byte text read from a local path or an http(s) URL."""

    kind: Literal["file"] = "file"
    location: str


CorpusSource = Annotated[
    Union[Markov2Spec, CipherSpec, FileSource], Field(discriminator="kind")
]


class DataConfig(StrictModel):
    """Corpora for the original domain, its finetuning proxy and the new domain.

    ``original`` trains the backbone and provides the old-domain held-out set;
    ``proxy`` supplies the old-domain sequences mixed in at rate ``p`` during
    extension (defaults to ``original`` with a perturbed temperature).
    """

    original: CorpusSource = Field(default_factory=lambda: Markov2Spec(seed=0))
    proxy: Optional[CorpusSource] = None
    new: CorpusSource = Field(default_factory=CipherSpec)
    n_tokens: int = Field(default=2_000_000, gt=0)
    heldout_fraction: float = Field(default=0.05, gt=0.0, lt=1.0)
    proxy_temperature: float = Field(default=1.25, gt=0.0)

    @model_validator(mode="after")
    def fill_proxy(self) -> "DataConfig":
        if self.proxy is None and isinstance(self.original, Markov2Spec):
            object.__setattr__(
                self,
                "proxy",
                self.original.model_copy(
                    update={"temperature": self.proxy_temperature}
                ),
            )
        return self

    def proxy_source(self) -> CorpusSource:
        """Source of old-domain training sequences."""
        return self.proxy if self.proxy is not None else self.original
