"""Token corpora and their train/held-out split."""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import httpx
import numpy as np

from nres.data.tokenizer import tokenize
from nres.errors import ConfigurationError, CorpusFetchError

logger = logging.getLogger(__name__)

Domain = Literal["original", "new"]


@dataclass(frozen=True)
class Corpus:
    """Immutable byte-token stream tagged with its domain.

    The last ``heldout_fraction`` of the stream is held out; the rest is the
    training split, so the two never overlap.
    """

    domain: Domain
    tokens: np.ndarray
    heldout_fraction: float = 0.05

    def __post_init__(self) -> None:
        if self.tokens.size == 0:
            raise ConfigurationError(f"{self.domain} corpus is empty")
        if not 0.0 < self.heldout_fraction < 1.0:
            raise ConfigurationError(
                f"heldout_fraction must be in (0, 1), got {self.heldout_fraction}"
            )
        tokens = np.ascontiguousarray(self.tokens, dtype=np.int64)
        tokens.flags.writeable = False
        object.__setattr__(self, "tokens", tokens)

    def __len__(self) -> int:
        return int(self.tokens.size)

    @property
    def split_index(self) -> int:
        held = max(1, int(round(len(self) * self.heldout_fraction)))
        return max(1, len(self) - held)

    @property
    def train(self) -> np.ndarray:
        return self.tokens[: self.split_index]

    @property
    def heldout(self) -> np.ndarray:
        return self.tokens[self.split_index :]


def fetch_bytes(
    url: str, timeout: float = 30.0, client: httpx.Client | None = None
) -> bytes:
    """Download a corpus over http(s).

    Args:
        url: Location of the text
        timeout: Seconds before the request is abandoned
        client: Client to reuse; a short-lived one is opened when omitted

    Raises:
        CorpusFetchError: On network failure or a non-2xx response
    """
    try:
        if client is not None:
            response = client.get(url)
        else:
            with httpx.Client(timeout=timeout, follow_redirects=True) as owned:
                response = owned.get(url)
        response.raise_for_status()
        return response.content
    except httpx.HTTPStatusError as e:
        raise CorpusFetchError(
            f"HTTP error {e.response.status_code} fetching {url}"
        ) from e
    except httpx.RequestError as e:
        raise CorpusFetchError(f"Network error fetching {url}: {e}") from e


def load_corpus(
    location: str | Path,
    domain: Domain,
    heldout_fraction: float = 0.05,
    client: httpx.Client | None = None,
) -> Corpus:
    """Read a whole text file (local path or http(s) URL) as a byte corpus.

    Raises:
        ConfigurationError: If a local file does not exist or is empty
        CorpusFetchError: If a URL cannot be downloaded
    """
    location = str(location)
    if location.startswith(("http://", "https://")):
        raw = fetch_bytes(location, client=client)
    else:
        path = Path(location)
        if not path.is_file():
            raise ConfigurationError(f"corpus file not found: {path}")
        raw = path.read_bytes()
    logger.info("Loaded %d bytes of %s corpus from %s", len(raw), domain, location)
    return Corpus(domain, tokenize(raw), heldout_fraction)
