"""Index document construction and the field filter applied before indexing.

Extractor output carries bounding-box coordinates and class ids the search
engine has no use for; those fields are stripped here, and only the fields
listed in this schema ever reach the index. Serialization is canonical
(sorted keys, UTF-8) so byte comparison is valid in tests and snapshots.
"""

import json
from dataclasses import dataclass, field

from .detect import ImageExtraction
from .errors import InvalidDocument
from .keywords import ScoredPhrase
from .model import Kind, ObjectDescriptor, iso_utc

# Keys that must never survive refinement into the search engine.
FORBIDDEN_KEYS = ("bbox", "class_id")

CONTENT_TYPE_IMAGE = "image"
CONTENT_TYPE_DOCUMENT = "document"
CONTENT_TYPE_OTHER = "other"


@dataclass(frozen=True)
class IndexDocument:
    """The refined, filtered record the search engine indexes.

    ``contents`` holds lowercase labels (images) or keyphrases (documents),
    deduplicated and insertion-ordered. ``confidences`` maps label to the
    max confidence seen, present for images only. ``extraction_failed``
    marks objects stored despite their extractor being unavailable.
    """

    object_name: str
    account: str
    container: str
    url_path: str
    content_type: str
    contents: tuple[str, ...]
    size_bytes: int
    uploaded_at: str
    confidences: tuple[tuple[str, float], ...] | None = None
    extraction_failed: bool = field(default=False)

    def to_dict(self) -> dict:
        doc = {
            "object_name": self.object_name,
            "account": self.account,
            "container": self.container,
            "url_path": self.url_path,
            "content_type": self.content_type,
            "contents": list(self.contents),
            "size_bytes": self.size_bytes,
            "uploaded_at": self.uploaded_at,
        }
        if self.confidences is not None:
            # label/value pairs, not a JSON object: labels come from the
            # detector and must never surface as keys
            doc["confidences"] = [[label, conf] for label, conf in self.confidences]
        if self.extraction_failed:
            doc["extraction_failed"] = True
        return doc

    def confidence_map(self) -> dict[str, float]:
        return dict(self.confidences or ())

    def to_json(self) -> str:
        """Canonical serialization: sorted keys, compact, UTF-8 safe."""
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"), ensure_ascii=False)

    @classmethod
    def from_dict(cls, d: dict) -> "IndexDocument":
        try:
            return cls(
                object_name=d["object_name"],
                account=d["account"],
                container=d["container"],
                url_path=d["url_path"],
                content_type=d["content_type"],
                contents=tuple(d["contents"]),
                size_bytes=d["size_bytes"],
                uploaded_at=d["uploaded_at"],
                confidences=(
                    tuple((label, conf) for label, conf in d["confidences"])
                    if "confidences" in d
                    else None
                ),
                extraction_failed=bool(d.get("extraction_failed", False)),
            )
        except (KeyError, TypeError) as exc:
            raise InvalidDocument(f"bad index document: {exc}") from exc

    @classmethod
    def from_json(cls, raw: str) -> "IndexDocument":
        try:
            parsed = json.loads(raw)
        except ValueError as exc:
            raise InvalidDocument(f"not JSON: {exc}") from exc
        return cls.from_dict(parsed)

    def validate(self) -> None:
        if self.content_type not in (CONTENT_TYPE_IMAGE, CONTENT_TYPE_DOCUMENT, CONTENT_TYPE_OTHER):
            raise InvalidDocument(f"unknown content_type: {self.content_type!r}")
        expected = f"/v1/{self.account}/{self.container}/{self.object_name}"
        if self.url_path != expected:
            raise InvalidDocument(f"url_path {self.url_path!r} != {expected!r}")
        if self.size_bytes < 0:
            raise InvalidDocument("negative size_bytes")
        _reject_forbidden_keys(self.to_dict())


def _reject_forbidden_keys(value: object) -> None:
    if isinstance(value, dict):
        for key, sub in value.items():
            if key in FORBIDDEN_KEYS:
                raise InvalidDocument(f"forbidden key survived refinement: {key}")
            _reject_forbidden_keys(sub)
    elif isinstance(value, (list, tuple)):
        for sub in value:
            _reject_forbidden_keys(sub)


def _base_fields(desc: ObjectDescriptor) -> dict:
    return {
        "object_name": desc.path.object,
        "account": desc.path.account,
        "container": desc.path.container,
        "url_path": desc.path.render(),
        "size_bytes": desc.size_bytes,
        "uploaded_at": iso_utc(desc.uploaded_at),
    }


def build_image_doc(desc: ObjectDescriptor, ext: ImageExtraction) -> IndexDocument:
    """Distinct labels in first-occurrence order; max confidence per label.

    Boxes and class ids do not cross this boundary. An image with zero
    detections still builds (contents empty); indexing policy is the
    gateway's call.
    """
    if desc.content_type is None or desc.content_type.kind is not Kind.IMAGE:
        raise InvalidDocument("descriptor is not an image")
    contents: list[str] = []
    best: dict[str, float] = {}
    for det in ext.detections:
        if det.label not in best:
            contents.append(det.label)
            best[det.label] = det.confidence
        else:
            best[det.label] = max(best[det.label], det.confidence)
    return IndexDocument(
        content_type=CONTENT_TYPE_IMAGE,
        contents=tuple(contents),
        confidences=tuple((label, best[label]) for label in contents),
        **_base_fields(desc),
    )


def build_document_doc(desc: ObjectDescriptor, phrases: list[ScoredPhrase]) -> IndexDocument:
    """Phrase texts in rank order, deduplicated; no confidences field."""
    if desc.content_type is None or desc.content_type.kind is not Kind.DOCUMENT:
        raise InvalidDocument("descriptor is not a document")
    seen: set[str] = set()
    contents: list[str] = []
    for sp in phrases:
        if sp.phrase.text not in seen:
            seen.add(sp.phrase.text)
            contents.append(sp.phrase.text)
    return IndexDocument(
        content_type=CONTENT_TYPE_DOCUMENT,
        contents=tuple(contents),
        **_base_fields(desc),
    )


def build_other_doc(desc: ObjectDescriptor) -> IndexDocument:
    """Record for a stored-but-unextracted payload (unsupported type)."""
    return IndexDocument(
        content_type=CONTENT_TYPE_OTHER,
        contents=(),
        **_base_fields(desc),
    )


def build_failed_doc(desc: ObjectDescriptor) -> IndexDocument:
    """Record for an object whose extractor was unavailable at ingest."""
    kind = CONTENT_TYPE_OTHER
    if desc.content_type is not None:
        kind = (
            CONTENT_TYPE_IMAGE
            if desc.content_type.kind is Kind.IMAGE
            else CONTENT_TYPE_DOCUMENT
        )
    return IndexDocument(
        content_type=kind,
        contents=(),
        extraction_failed=True,
        **_base_fields(desc),
    )
