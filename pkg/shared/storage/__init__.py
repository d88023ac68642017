"""
Storage module for lgp-control.
"""

from .repository import (
    FLOAT_FORMAT,
    BaseRepository,
    DocumentRepository,
    TableRepository,
    decode_floats,
    encode_floats,
)

__all__ = [
    "FLOAT_FORMAT",
    "BaseRepository",
    "TableRepository",
    "DocumentRepository",
    "encode_floats",
    "decode_floats",
]
