"""Document text readers: plain text built in, others pluggable.

Format parsing is commodity; keyphrase ranking is the interesting part.
A basic DOCX reader ships here because the format is just zipped XML; PDF
needs a real parser, so it stays a plug-in point.
"""

import io
import re
import zipfile
from typing import Callable

from .errors import TextExtractionError
from .model import DocumentFormat

TextReader = Callable[[bytes], str]

_XML_TAG_RE = re.compile(rb"<[^>]+>")


def read_plaintext(data: bytes) -> str:
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise TextExtractionError(f"not valid UTF-8: {exc}") from exc


def read_docx(data: bytes) -> str:
    """Pull visible text out of word/document.xml; tags become spaces."""
    try:
        with zipfile.ZipFile(io.BytesIO(data)) as zf:
            xml = zf.read("word/document.xml")
    except (zipfile.BadZipFile, KeyError) as exc:
        raise TextExtractionError(f"not a readable docx: {exc}") from exc
    text = _XML_TAG_RE.sub(b" ", xml)
    return text.decode("utf-8", errors="replace")


_READERS: dict[DocumentFormat, TextReader] = {
    DocumentFormat.PLAINTEXT: read_plaintext,
    DocumentFormat.DOCX: read_docx,
}


def register_reader(fmt: DocumentFormat, reader: TextReader) -> None:
    """Plug in a reader for a format (e.g. a real PDF parser)."""
    _READERS[fmt] = reader


def extract_text(data: bytes, fmt: DocumentFormat) -> str:
    reader = _READERS.get(fmt)
    if reader is None:
        raise TextExtractionError(f"no text reader registered for {fmt.value}")
    return reader(data)
