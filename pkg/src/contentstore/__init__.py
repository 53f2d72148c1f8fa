"""Content-aware object storage with search-by-content at ingest time."""

from .model import (
    ContentType,
    DocumentFormat,
    ImageFormat,
    Kind,
    ObjectDescriptor,
    ObjectPath,
    canonical_path,
    content_hash,
)

__all__ = [
    "ContentType",
    "DocumentFormat",
    "ImageFormat",
    "Kind",
    "ObjectDescriptor",
    "ObjectPath",
    "canonical_path",
    "content_hash",
]
