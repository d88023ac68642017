"""
File-backed repositories for run artifacts.
Repository pattern over a root directory.
"""

from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Generic, List, TypeVar

import numpy as np
import pandas as pd
import yaml

from shared.exceptions import NotFoundError, StorageError

ObjType = TypeVar("ObjType")

FLOAT_FORMAT = "%.17g"


def encode_floats(values: Any) -> Any:
    """Nested lists of ``float.hex`` strings, exact for every finite double."""
    array = np.asarray(values, dtype=float)
    if array.ndim == 0:
        return float(array).hex()
    return [encode_floats(item) for item in array]


def decode_floats(values: Any) -> np.ndarray:
    if isinstance(values, list):
        return np.array([decode_floats(item) for item in values], dtype=float)
    if isinstance(values, str):
        values = float.fromhex(values)
    return np.asarray(values, dtype=float)


class BaseRepository(ABC, Generic[ObjType]):
    """
    Base repository with save/load operations.
    Provides the path handling and error wrapping shared by every artifact kind.
    """

    suffix = ""

    def __init__(self, root: str | Path):
        """
        Initialization of the repository.

        Args:
            root: Directory holding the artifacts
        """
        self.root = Path(root)

    def path_for(self, name: str) -> Path:
        return self.root / f"{name}{self.suffix}"

    def exists(self, name: str) -> bool:
        return self.path_for(name).is_file()

    def list(self) -> List[str]:
        """Names of stored artifacts, sorted."""
        if not self.root.is_dir():
            return []
        paths = self.root.glob(f"*{self.suffix}")
        return sorted(p.name[: -len(self.suffix)] for p in paths)

    def save(self, obj: ObjType, name: str) -> Path:
        """
        Write an artifact, creating the root directory when needed.

        Raises:
            StorageError: If the file cannot be written
        """
        path = self.path_for(name)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            self._write(obj, path)
        except OSError as exc:
            raise StorageError(path, "cannot write artifact", exc) from exc
        return path

    def load(self, name: str) -> ObjType:
        """
        Read an artifact.

        Raises:
            NotFoundError: If no artifact has this name
            StorageError: If the file cannot be read or parsed
        """
        path = self.path_for(name)
        if not path.is_file():
            raise NotFoundError(self.__class__.__name__, path)
        try:
            return self._read(path)
        except (OSError, ValueError, KeyError, TypeError, yaml.YAMLError) as exc:
            raise StorageError(path, "cannot read artifact", exc) from exc

    @abstractmethod
    def _write(self, obj: ObjType, path: Path) -> None: ...

    @abstractmethod
    def _read(self, path: Path) -> ObjType: ...


class TableRepository(BaseRepository[pd.DataFrame]):
    """CSV tables written at 17 significant digits and read back round-trip exact."""

    suffix = ".csv"

    def __init__(self, root: str | Path, float_format: str = FLOAT_FORMAT):
        super().__init__(root)
        self.float_format = float_format

    def _write(self, obj: pd.DataFrame, path: Path) -> None:
        obj.to_csv(
            path, index=False, float_format=self.float_format, lineterminator="\n"
        )

    def _read(self, path: Path) -> pd.DataFrame:
        try:
            return pd.read_csv(path, float_precision="round_trip")
        except pd.errors.EmptyDataError:
            return pd.DataFrame()


class DocumentRepository(BaseRepository[dict]):
    """YAML mapping documents."""

    suffix = ".yml"

    def _write(self, obj: dict, path: Path) -> None:
        path.write_text(yaml.safe_dump(obj, sort_keys=False), encoding="utf-8")

    def _read(self, path: Path) -> dict:
        document = yaml.safe_load(path.read_text(encoding="utf-8"))
        if not isinstance(document, dict):
            raise ValueError("top level must be a mapping")
        return document
