"""Portable little-endian model checkpoints.

Layout::

    b"NRES"                     magic
    u32                         format version (1)
    u32                         tensor count
    per tensor:
        u32 + bytes             name length, UTF-8 name
        u32 + u64[ndim]         rank and extents
        u8                      dtype code (0 = float32)
        f32[prod(extents)]      row-major data
    u32 + bytes                 UTF-8 JSON {"model", "extension", "step"}

The trailing JSON block may be absent, in which case no configs are known.
"""

import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from nres.errors import ConfigurationError, DimensionError, FormatError
from nres.models import ExtensionConfig, ModelConfig
from nres.nn import BackboneModel, ExtendedModel, extend

logger = logging.getLogger(__name__)

MAGIC = b"NRES"
VERSION = 1
DTYPE_F32 = 0


@dataclass
class Checkpoint:
    """Decoded checkpoint contents, tensors in file order."""

    tensors: dict[str, np.ndarray] = field(default_factory=dict)
    model: ModelConfig | None = None
    extension: ExtensionConfig | None = None
    step: int = 0


def encode_checkpoint(
    tensors: dict[str, np.ndarray], metadata: dict[str, object] | None
) -> bytes:
    """Serialize named arrays (as float32) and an optional JSON metadata block."""
    parts = [MAGIC, struct.pack("<II", VERSION, len(tensors))]
    for name, array in tensors.items():
        encoded = name.encode("utf-8")
        data = np.ascontiguousarray(array, dtype="<f4")
        parts.append(struct.pack("<I", len(encoded)))
        parts.append(encoded)
        parts.append(struct.pack(f"<I{data.ndim}Q", data.ndim, *data.shape))
        parts.append(struct.pack("<B", DTYPE_F32))
        parts.append(data.tobytes())
    if metadata is not None:
        blob = json.dumps(metadata, sort_keys=True).encode("utf-8")
        parts.append(struct.pack("<I", len(blob)))
        parts.append(blob)
    return b"".join(parts)


def save_checkpoint(
    model: BackboneModel | ExtendedModel, path: Path | str, step: int = 0
) -> Path:
    """Write every parameter plus the model and extension configs to ``path``."""
    if isinstance(model, ExtendedModel):
        model_cfg, ext_cfg = model.model_config, model.config
    else:
        model_cfg, ext_cfg = model.config, None
    metadata = {
        "model": model_cfg.model_dump(mode="json"),
        "extension": ext_cfg.model_dump(mode="json") if ext_cfg else None,
        "step": step,
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_checkpoint(model.state_dict(), metadata))
    logger.info("Wrote checkpoint %s (step %d)", path, step)
    return path


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.offset = 0

    @property
    def remaining(self) -> int:
        return len(self.buf) - self.offset

    def take(self, n: int, what: str) -> bytes:
        if n > self.remaining:
            raise FormatError(
                f"truncated {what}: need {n} bytes, {self.remaining} left",
                self.offset,
            )
        chunk = self.buf[self.offset : self.offset + n]
        self.offset += n
        return chunk

    def unpack(self, fmt: str, what: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))


def decode_checkpoint(buf: bytes) -> Checkpoint:
    """Parse checkpoint bytes.

    Raises:
        FormatError: On bad magic, unknown version or dtype, truncation,
            malformed names or metadata, or trailing bytes
    """
    reader = _Reader(buf)
    if reader.take(4, "magic") != MAGIC:
        raise FormatError("bad magic, not an nres checkpoint", 0)
    (version,) = reader.unpack("<I", "version")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", 4)
    (count,) = reader.unpack("<I", "tensor count")

    ckpt = Checkpoint()
    for index in range(count):
        start = reader.offset
        (name_len,) = reader.unpack("<I", f"name length of tensor {index}")
        try:
            name = reader.take(name_len, f"name of tensor {index}").decode("utf-8")
        except UnicodeDecodeError as e:
            raise FormatError(f"tensor {index} name is not UTF-8", start + 4) from e
        if name in ckpt.tensors:
            raise FormatError(f"duplicate tensor name '{name}'", start)
        (ndim,) = reader.unpack("<I", f"rank of '{name}'")
        shape = reader.unpack(f"<{ndim}Q", f"shape of '{name}'")
        dtype_at = reader.offset
        (dtype,) = reader.unpack("<B", f"dtype of '{name}'")
        if dtype != DTYPE_F32:
            raise FormatError(f"unknown dtype code {dtype} for '{name}'", dtype_at)
        n_bytes = 4 * int(np.prod(shape, dtype=np.int64))
        data = reader.take(n_bytes, f"data of '{name}'")
        ckpt.tensors[name] = np.frombuffer(data, dtype="<f4").reshape(shape).copy()

    if reader.remaining == 0:
        return ckpt

    meta_at = reader.offset
    (blob_len,) = reader.unpack("<I", "metadata length")
    blob = reader.take(blob_len, "metadata")
    if reader.remaining:
        raise FormatError(f"{reader.remaining} trailing bytes", reader.offset)
    try:
        meta = json.loads(blob.decode("utf-8"))
        if meta.get("model") is not None:
            ckpt.model = ModelConfig.model_validate(meta["model"])
        if meta.get("extension") is not None:
            ckpt.extension = ExtensionConfig.model_validate(meta["extension"])
        ckpt.step = int(meta.get("step", 0))
    except (UnicodeDecodeError, json.JSONDecodeError, AttributeError) as e:
        raise FormatError(f"malformed metadata: {e}", meta_at) from e
    except ValidationError as e:
        raise FormatError(f"invalid config in metadata: {e}", meta_at) from e
    return ckpt


def read_checkpoint(path: Path | str) -> Checkpoint:
    """Read the raw tensor map and configs of a checkpoint file.

    Raises:
        ConfigurationError: If the file does not exist
        FormatError: If the file cannot be decoded
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"checkpoint not found: {path}")
    return decode_checkpoint(path.read_bytes())


def load_checkpoint(path: Path | str) -> BackboneModel | ExtendedModel:
    """Rebuild the model a checkpoint was saved from.

    Nothing is returned unless every tensor matches the rebuilt model.

    Raises:
        FormatError: If the file is malformed, lacks a model config, or its
            tensors do not fit the configured architecture
    """
    path = Path(path)
    ckpt = read_checkpoint(path)
    size = path.stat().st_size
    if ckpt.model is None:
        raise FormatError("checkpoint has no model config", size)

    backbone = BackboneModel(ckpt.model)
    model = backbone if ckpt.extension is None else extend(backbone, ckpt.extension)
    try:
        model.load_state_dict(ckpt.tensors)
    except (ConfigurationError, DimensionError) as e:
        raise FormatError(f"tensors do not match config: {e}", size) from e
    return model
