"""Object detection on a copy of the uploaded image.

The detector is an adapter (in-process or HTTP); shipping model weights is
out of scope, so tests and desk runs use the sidecar-driven reference
detector, which just echoes a ground-truth annotation file. The uploaded
byte stream itself is never handed to the adapter: detection always runs
on a distinct copy, so a misbehaving detector cannot touch what gets
stored.
"""

import json
import time
from dataclasses import dataclass
from typing import Protocol, Sequence

import requests

from .errors import DetectorProtocolError, DetectorUnavailable, MalformedSidecar

DEFAULT_CONFIDENCE_THRESHOLD = 0.25

SIDECAR_SUFFIX = ".labels.json"


@dataclass(frozen=True)
class Detection:
    """One detected object: class label, confidence, box, class id."""

    label: str
    confidence: float
    bbox: tuple[float, float, float, float]
    class_id: int

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence out of [0,1]: {self.confidence}")
        x, y, w, h = self.bbox
        if x < 0 or y < 0 or w <= 0 or h <= 0:
            raise ValueError(f"bad bbox: {self.bbox}")
        if self.class_id < 0:
            raise ValueError(f"negative class_id: {self.class_id}")


@dataclass(frozen=True)
class ImageExtraction:
    """Detector output for one image plus wall-clock around the call only."""

    detections: tuple[Detection, ...]
    detector_name: str
    detection_millis: int


class DetectorAdapter(Protocol):
    name: str

    def detect(self, image: bytes) -> list[Detection]: ...


def _parse_detections(payload: object, error_cls: type[Exception]) -> list[Detection]:
    if not isinstance(payload, dict) or "detections" not in payload:
        raise error_cls("missing 'detections' key")
    raw = payload["detections"]
    if not isinstance(raw, list):
        raise error_cls("'detections' must be a list")
    out = []
    for entry in raw:
        try:
            out.append(
                Detection(
                    label=str(entry["label"]),
                    confidence=float(entry["confidence"]),
                    bbox=tuple(float(v) for v in entry["bbox"]),
                    class_id=int(entry["class_id"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise error_cls(f"bad detection entry {entry!r}: {exc}") from exc
    return out


def reference_detector(image: bytes, sidecar: bytes) -> list[Detection]:
    """Deterministic detector: echo the sidecar annotations, order kept.

    The sidecar is the ``<imagefile>.labels.json`` document with the same
    schema the HTTP adapter replies with.
    """
    try:
        payload = json.loads(sidecar)
    except ValueError as exc:
        raise MalformedSidecar(f"sidecar is not JSON: {exc}") from exc
    return _parse_detections(payload, MalformedSidecar)


class SidecarDetector:
    """Adapter wrapping :func:`reference_detector` for a fixed sidecar."""

    name = "reference-sidecar"

    def __init__(self, sidecar: bytes):
        self.sidecar = sidecar

    def detect(self, image: bytes) -> list[Detection]:
        return reference_detector(image, self.sidecar)


class HttpDetector:
    """Adapter for a detection service: POST /detect with raw image bytes."""

    name = "http"

    def __init__(self, url: str, timeout: float = 30.0):
        self.url = url.rstrip("/")
        self.name = f"http:{self.url}"
        self.timeout = timeout
        self._session = requests.Session()

    def detect(self, image: bytes) -> list[Detection]:
        try:
            resp = self._session.post(
                f"{self.url}/detect",
                data=image,
                headers={"Content-Type": "application/octet-stream"},
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise DetectorUnavailable(str(exc)) from exc
        if resp.status_code != 200:
            raise DetectorUnavailable(f"detector replied HTTP {resp.status_code}")
        try:
            payload = resp.json()
        except ValueError as exc:
            raise DetectorProtocolError(f"detector reply is not JSON: {exc}") from exc
        return _parse_detections(payload, DetectorProtocolError)


def detect_on_copy(
    image: bytes,
    detector: DetectorAdapter,
    confidence_threshold: float = DEFAULT_CONFIDENCE_THRESHOLD,
) -> ImageExtraction:
    """Run the detector on a distinct copy of the image bytes.

    The caller's buffer is never passed through, so the stored object stays
    bit-identical no matter what the adapter does with its input. Labels
    are lowercased at this boundary and detections under the confidence
    threshold are dropped.
    """
    working_copy = bytes(bytearray(image))
    start = time.monotonic()
    raw = detector.detect(working_copy)
    elapsed_ms = int((time.monotonic() - start) * 1000)
    del working_copy

    kept = tuple(
        Detection(d.label.lower(), d.confidence, d.bbox, d.class_id)
        for d in raw
        if d.confidence >= confidence_threshold
    )
    return ImageExtraction(kept, detector.name, elapsed_ms)
