"""Payload classification: image or document, and which format.

Runs first in the ingest pipeline so the upload can be routed to the right
extractor. Magic bytes always take priority; the filename extension is a
fallback only (plain text has no magic, DOCX needs the extension to
disambiguate generic ZIP containers).
"""

from dataclasses import dataclass
from enum import Enum

from .errors import UnsupportedType
from .model import ContentType, DocumentFormat, ImageFormat

_JPEG_MAGIC = b"\xff\xd8\xff"
_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
_PDF_MAGIC = b"%PDF"
_ZIP_MAGIC = b"PK\x03\x04"


class DetectedBy(str, Enum):
    MAGIC_BYTES = "magic_bytes"
    EXTENSION = "extension"


@dataclass(frozen=True)
class ClassificationResult:
    content_type: ContentType
    detected_by: DetectedBy


def _extension(filename: str) -> str:
    _, dot, ext = filename.rpartition(".")
    return ext.lower() if dot else ""


def classify(data: bytes, filename: str) -> ClassificationResult:
    """Decide whether a payload is an image or a document.

    Supported set: JPEG/PNG images; plain-text, PDF, and DOCX documents.
    Deterministic and total: any byte sequence either classifies or raises
    UnsupportedType (gateway policy stores such objects without extraction).
    """
    ext = _extension(filename)

    if data.startswith(_JPEG_MAGIC):
        return ClassificationResult(ContentType.image(ImageFormat.JPEG), DetectedBy.MAGIC_BYTES)
    if data.startswith(_PNG_MAGIC):
        return ClassificationResult(ContentType.image(ImageFormat.PNG), DetectedBy.MAGIC_BYTES)
    if data.startswith(_PDF_MAGIC):
        return ClassificationResult(ContentType.document(DocumentFormat.PDF), DetectedBy.MAGIC_BYTES)
    # ZIP magic alone is ambiguous (any Office/OpenDocument/zip payload);
    # require the .docx extension as corroboration.
    if data.startswith(_ZIP_MAGIC) and ext == "docx":
        return ClassificationResult(ContentType.document(DocumentFormat.DOCX), DetectedBy.MAGIC_BYTES)

    if ext == "txt" and _decodes_as_text(data):
        return ClassificationResult(
            ContentType.document(DocumentFormat.PLAINTEXT), DetectedBy.EXTENSION
        )
    if ext in ("jpg", "jpeg"):
        return ClassificationResult(ContentType.image(ImageFormat.JPEG), DetectedBy.EXTENSION)
    if ext == "png":
        return ClassificationResult(ContentType.image(ImageFormat.PNG), DetectedBy.EXTENSION)
    if ext == "pdf":
        return ClassificationResult(ContentType.document(DocumentFormat.PDF), DetectedBy.EXTENSION)

    raise UnsupportedType(f"no supported magic or extension for {filename!r}")


def _decodes_as_text(data: bytes) -> bool:
    try:
        data.decode("utf-8")
    except UnicodeDecodeError:
        return False
    return True
