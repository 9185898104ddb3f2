"""Base Pydantic model shared by configs and reports."""

from pydantic import BaseModel, ConfigDict


class StrictModel(BaseModel):
    """Model that rejects unknown keys and re-validates on assignment."""

    model_config = ConfigDict(extra="forbid", validate_assignment=True)
