"""nres - Gated parallel adapters for extending language models without forgetting."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("nres")
except PackageNotFoundError:
    # Package is not installed, fallback for development
    __version__ = "dev"

# Re-export commonly used items
from nres.errors import NresError
from nres.models import ExtensionConfig, ModelConfig, RunConfig, TrainConfig

__all__ = [
    "__version__",
    "NresError",
    "ExtensionConfig",
    "ModelConfig",
    "RunConfig",
    "TrainConfig",
]
