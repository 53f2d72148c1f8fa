"""Shared domain types: object paths, content types, descriptors, hashing.

The canonical path string ``/v1/{account}/{container}/{object}`` is part of
the wire API and the index document schema, so rendering and parsing here
must stay byte-for-byte stable.
"""

import hashlib
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum

from .errors import EmptyComponent, IllegalSlash

_PATH_RE = re.compile(r"^/v1/([^/]+)/([^/]+)/(.+)$", re.DOTALL)


class Kind(str, Enum):
    IMAGE = "image"
    DOCUMENT = "document"


class ImageFormat(str, Enum):
    JPEG = "jpeg"
    PNG = "png"


class DocumentFormat(str, Enum):
    PLAINTEXT = "plaintext"
    PDF = "pdf"
    DOCX = "docx"


@dataclass(frozen=True)
class ContentType:
    """What an object is: image or document, plus its concrete format."""

    kind: Kind
    format: ImageFormat | DocumentFormat

    def __post_init__(self):
        if self.kind is Kind.IMAGE and not isinstance(self.format, ImageFormat):
            raise ValueError(f"image format expected, got {self.format!r}")
        if self.kind is Kind.DOCUMENT and not isinstance(self.format, DocumentFormat):
            raise ValueError(f"document format expected, got {self.format!r}")

    @classmethod
    def image(cls, fmt: ImageFormat) -> "ContentType":
        return cls(Kind.IMAGE, fmt)

    @classmethod
    def document(cls, fmt: DocumentFormat) -> "ContentType":
        return cls(Kind.DOCUMENT, fmt)


@dataclass(frozen=True)
class ObjectPath:
    """Identity of one object in account/container/object space.

    Immutable; the object component may itself contain ``/``.
    """

    account: str
    container: str
    object: str

    def render(self) -> str:
        return f"/v1/{self.account}/{self.container}/{self.object}"

    @classmethod
    def parse(cls, raw: str) -> "ObjectPath":
        m = _PATH_RE.match(raw)
        if m is None:
            raise EmptyComponent(f"not a canonical object path: {raw!r}")
        return canonical_path(m.group(1), m.group(2), m.group(3))

    def __str__(self) -> str:
        return self.render()


def canonical_path(account: str, container: str, object: str) -> ObjectPath:
    """Validate components and build an :class:`ObjectPath`.

    Raises EmptyComponent if any part is empty, IllegalSlash if account or
    container contains ``/``.
    """
    for name, value in (("account", account), ("container", container), ("object", object)):
        if not value:
            raise EmptyComponent(f"{name} must be non-empty")
    if "/" in account:
        raise IllegalSlash(f"account may not contain '/': {account!r}")
    if "/" in container:
        raise IllegalSlash(f"container may not contain '/': {container!r}")
    return ObjectPath(account, container, object)


def content_hash(data: bytes) -> str:
    """128-bit content digest as 32 hex chars.

    MD5, the same primitive the placement ring hashes paths with, so one
    digest serves both placement and integrity checks.
    """
    return hashlib.md5(data).hexdigest()


def utc_now_seconds() -> int:
    """Current UTC time at second resolution (epoch seconds)."""
    return int(datetime.now(timezone.utc).timestamp())


def iso_utc(epoch_seconds: int) -> str:
    """Render epoch seconds as a UTC ISO-8601 string, e.g. 2024-05-01T12:00:00Z."""
    dt = datetime.fromtimestamp(epoch_seconds, tz=timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_iso_utc(stamp: str) -> int:
    """Inverse of :func:`iso_utc`."""
    dt = datetime.strptime(stamp, "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


@dataclass(frozen=True)
class ObjectDescriptor:
    """Stored metadata of one object: identity, size, digest, type, time.

    ``content_type`` is None for payloads that matched no supported format
    (they are stored but never routed to an extractor).
    """

    path: ObjectPath
    size_bytes: int
    content_hash: str
    content_type: ContentType | None
    uploaded_at: int

    def __post_init__(self):
        if self.size_bytes < 0:
            raise ValueError("size_bytes must be non-negative")
        if len(self.content_hash) != 32:
            raise ValueError("content_hash must be a 128-bit hex digest")

    @classmethod
    def for_bytes(
        cls,
        path: ObjectPath,
        data: bytes,
        content_type: ContentType | None,
        uploaded_at: int | None = None,
    ) -> "ObjectDescriptor":
        stamp = utc_now_seconds() if uploaded_at is None else uploaded_at
        return cls(path, len(data), content_hash(data), content_type, stamp)

    def to_dict(self) -> dict:
        return {
            "account": self.path.account,
            "container": self.path.container,
            "object": self.path.object,
            "size_bytes": self.size_bytes,
            "content_hash": self.content_hash,
            "content_kind": self.content_type.kind.value if self.content_type else None,
            "content_format": self.content_type.format.value if self.content_type else None,
            "uploaded_at": self.uploaded_at,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ObjectDescriptor":
        ct = None
        if d.get("content_kind"):
            kind = Kind(d["content_kind"])
            fmt_cls = ImageFormat if kind is Kind.IMAGE else DocumentFormat
            ct = ContentType(kind, fmt_cls(d["content_format"]))
        return cls(
            path=canonical_path(d["account"], d["container"], d["object"]),
            size_bytes=d["size_bytes"],
            content_hash=d["content_hash"],
            content_type=ct,
            uploaded_at=d["uploaded_at"],
        )
