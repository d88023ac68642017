"""
Run metadata written next to every set of artifacts.
"""

import uuid
from datetime import datetime, timezone
from importlib import metadata as importlib_metadata
from typing import Any, Dict, Optional

from pydantic import BaseModel, Field

from shared.config import SCHEMA_VERSION

TRACKED_PACKAGES = ("lgp-control", "numpy", "scipy", "pandas", "pydantic", "structlog")


def package_versions() -> Dict[str, str]:
    versions = {}
    for name in TRACKED_PACKAGES:
        try:
            versions[name] = importlib_metadata.version(name)
        except importlib_metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


class RunMetadata(BaseModel):
    """
    Self-describing record of one CLI run.

    The timestamp and run id only live here, so the CSV artifacts of two
    runs with the same seed and config stay byte-identical.
    """

    run_id: uuid.UUID = Field(default_factory=uuid.uuid4)
    created_at: datetime = Field(default_factory=lambda: datetime.now(timezone.utc))
    schema_version: str = SCHEMA_VERSION
    command: str
    seed: int
    config: Dict[str, Any] = Field(default_factory=dict)
    versions: Dict[str, str] = Field(default_factory=package_versions)
    artifacts: list[str] = Field(default_factory=list)
    summary: Dict[str, Any] = Field(default_factory=dict)
    error: Optional[Dict[str, Any]] = None

    def to_document(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")
