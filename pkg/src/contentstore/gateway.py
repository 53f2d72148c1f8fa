"""Gateway orchestration: token auth, upload pipeline, retrieval, search.

The upload path classifies the payload, then for images runs detection
concurrently with the replicated write of the original bytes; documents
extract keyphrases first, then write. The search index is only updated
after the write quorum succeeds, so a search hit can never point at an
object whose write failed. Extractor failures do not block storage: the
object is written and indexed with empty contents plus a failure flag.
"""

import base64
import json
import secrets
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .classify import classify
from .detect import DetectorAdapter, ImageExtraction, SidecarDetector, detect_on_copy
from .errors import (
    DetectorProtocolError,
    DetectorUnavailable,
    EmbedderUnavailable,
    EmptyInput,
    Forbidden,
    TextExtractionError,
    Unauthorized,
    UnsupportedType,
)
from .indexdoc import (
    build_document_doc,
    build_failed_doc,
    build_image_doc,
    build_other_doc,
)
from .keywords import Embedder, extract_keyphrases
from .model import Kind, ObjectDescriptor, ObjectPath, iso_utc
from .search import Filters, Query, QueryResponse, SearchEngine
from .storage import StorageCluster, StoredObject, WriteReceipt
from .textread import extract_text

TOKEN_TTL_SECONDS = 24 * 3600

STATUS_CREATED = "created"
STATUS_PARTIAL = "partial"


@dataclass(frozen=True)
class AuthToken:
    token: str
    account: str
    expires_at: int


@dataclass(frozen=True)
class UploadOutcome:
    descriptor: ObjectDescriptor
    write: WriteReceipt
    indexed: bool
    status: str
    extraction_millis: int
    upload_millis: int
    total_millis: int

    def to_dict(self) -> dict:
        ct = self.descriptor.content_type
        return {
            "url_path": self.descriptor.path.render(),
            "size_bytes": self.descriptor.size_bytes,
            "content_hash": self.descriptor.content_hash,
            "content_type": ct.kind.value if ct is not None else "other",
            "acks": self.write.acks,
            "replicas_attempted": self.write.replicas_attempted,
            "failed_nodes": list(self.write.failed_nodes),
            "indexed": self.indexed,
            "status": self.status,
            "extraction_millis": self.extraction_millis,
            "upload_millis": self.upload_millis,
            "total_millis": self.total_millis,
        }


class GatewayCore:
    """Stateless request orchestration over a ring, cluster, and index.

    One instance serves many concurrent requests; uploads to the same
    object path are serialized against each other.
    """

    def __init__(
        self,
        cluster: StorageCluster,
        engine: SearchEngine,
        users: list[dict],
        detector: DetectorAdapter | None = None,
        embedder: Embedder | None = None,
        keyphrase_k: int = 3,
        clock=time.time,
    ):
        self.cluster = cluster
        self.engine = engine
        self.users = {u["user"]: u for u in users}
        self.detector = detector
        self.embedder = embedder
        self.keyphrase_k = keyphrase_k
        self.clock = clock
        self._tokens: dict[str, AuthToken] = {}
        self._tokens_lock = threading.Lock()
        self._path_locks: dict[str, threading.Lock] = {}
        self._path_locks_guard = threading.Lock()

    # --- auth ---

    def authenticate(self, user: str, key: str) -> AuthToken:
        entry = self.users.get(user)
        if entry is None or entry["key"] != key:
            raise Unauthorized("bad credentials")
        token = AuthToken(
            token=secrets.token_hex(16),
            account=entry["account"],
            expires_at=int(self.clock()) + TOKEN_TTL_SECONDS,
        )
        with self._tokens_lock:
            self._tokens[token.token] = token
        return token

    def authorize(self, token: str) -> str:
        """Resolve a token to its account; expired tokens never authorize."""
        with self._tokens_lock:
            entry = self._tokens.get(token)
        if entry is None or self.clock() >= entry.expires_at:
            raise Unauthorized("unknown or expired token")
        return entry.account

    def _authorize_path(self, token: str, path: ObjectPath) -> None:
        account = self.authorize(token)
        if account != path.account:
            raise Forbidden(f"token for {account!r} cannot touch {path.account!r}")

    def _lock_for(self, path: ObjectPath) -> threading.Lock:
        key = path.render()
        with self._path_locks_guard:
            lock = self._path_locks.get(key)
            if lock is None:
                lock = self._path_locks[key] = threading.Lock()
            return lock

    # --- upload pipeline ---

    def upload(
        self,
        token: str,
        path: ObjectPath,
        data: bytes,
        filename: str | None = None,
        sidecar: bytes | None = None,
    ) -> UploadOutcome:
        """Classify, extract, store with quorum, then index.

        ``sidecar`` carries reference detections when the gateway runs in
        sidecar-detector mode; ignored when an external detector is
        configured.
        """
        self._authorize_path(token, path)
        if not data:
            raise ValueError("empty upload body")
        name = filename if filename else path.object.rsplit("/", 1)[-1]

        with self._lock_for(path):
            return self._run_pipeline(path, data, name, sidecar, time.monotonic())

    def _run_pipeline(self, path, data, name, sidecar, started) -> UploadOutcome:
        try:
            classification = classify(data, name)
            content_type = classification.content_type
        except UnsupportedType:
            content_type = None
        desc = ObjectDescriptor.for_bytes(path, data, content_type,
                                          uploaded_at=int(self.clock()))

        if content_type is not None and content_type.kind is Kind.IMAGE:
            doc, receipt, extraction_ms, upload_ms, failed = self._image_route(
                desc, data, sidecar
            )
        elif content_type is not None:
            doc, receipt, extraction_ms, upload_ms, failed = self._document_route(
                desc, data
            )
        else:
            t0 = time.monotonic()
            receipt = self.cluster.put(path, data, desc)
            upload_ms = _ms_since(t0)
            doc, extraction_ms, failed = build_other_doc(desc), 0, False

        self.engine.index_doc(doc)
        total_ms = _ms_since(started)
        return UploadOutcome(
            descriptor=desc,
            write=receipt,
            indexed=True,
            status=STATUS_PARTIAL if failed else STATUS_CREATED,
            extraction_millis=extraction_ms,
            upload_millis=upload_ms,
            total_millis=total_ms,
        )

    def _image_route(self, desc, data, sidecar):
        """Detection on a copy, concurrent with the replicated write."""
        detector = self._detector_for(sidecar)

        def run_detection() -> tuple[ImageExtraction | None, int, bool]:
            t0 = time.monotonic()
            try:
                ext = detect_on_copy(data, detector)
                return ext, _ms_since(t0), False
            except (DetectorUnavailable, DetectorProtocolError):
                return None, _ms_since(t0), True

        def run_write() -> tuple[WriteReceipt, int]:
            t0 = time.monotonic()
            receipt = self.cluster.put(desc.path, data, desc)
            return receipt, _ms_since(t0)

        with ThreadPoolExecutor(max_workers=2) as pool:
            detection_future = pool.submit(run_detection)
            write_future = pool.submit(run_write)
            # quorum failure aborts the upload; the detached detection
            # worked on a copy and its result is simply dropped
            receipt, upload_ms = write_future.result()
            extraction, extraction_ms, failed = detection_future.result()

        doc = build_failed_doc(desc) if failed else build_image_doc(desc, extraction)
        return doc, receipt, extraction_ms, upload_ms, failed

    def _document_route(self, desc, data):
        """Extract keyphrases, then write; indexing follows write success."""
        t0 = time.monotonic()
        failed = False
        phrases = []
        try:
            text = extract_text(data, desc.content_type.format)
            if self.embedder is None:
                raise EmbedderUnavailable("no embedder configured")
            phrases = extract_keyphrases(text, self.embedder, self.keyphrase_k)
        except (TextExtractionError, EmbedderUnavailable):
            failed = True
        except EmptyInput:
            phrases = []
        extraction_ms = _ms_since(t0)

        t1 = time.monotonic()
        receipt = self.cluster.put(desc.path, data, desc)
        upload_ms = _ms_since(t1)

        doc = build_failed_doc(desc) if failed else build_document_doc(desc, phrases)
        return doc, receipt, extraction_ms, upload_ms, failed

    def _detector_for(self, sidecar: bytes | None) -> DetectorAdapter:
        if self.detector is not None:
            return self.detector
        return SidecarDetector(sidecar if sidecar is not None else b'{"detections":[]}')

    # --- retrieval ---

    def get_object(self, token: str, path: ObjectPath) -> StoredObject:
        """Exactly one replicated read serves one user GET."""
        self._authorize_path(token, path)
        return self.cluster.get(path)

    def head_object(self, token: str, path: ObjectPath) -> ObjectDescriptor:
        self._authorize_path(token, path)
        return self.cluster.head(path)

    def delete_object(self, token: str, path: ObjectPath) -> bool:
        self._authorize_path(token, path)
        with self._lock_for(path):
            self.engine.delete_doc(path.render())
            return self.cluster.delete(path)

    # --- search ---

    def search(
        self,
        token: str,
        q: str,
        mode: str = "AND",
        content_type: str | None = None,
        container: str | None = None,
        limit: int = 50,
    ) -> QueryResponse:
        """Delegate to the engine with the account filter always applied."""
        account = self.authorize(token)
        filters = Filters(content_type=content_type, account=account,
                          container=container)
        query = Query.from_text(q, mode=mode.upper(), filters=filters, limit=limit)
        return self.engine.search(query)

    def suggest(self, token: str, prefix: str, n: int = 10) -> list[str]:
        account = self.authorize(token)
        return self.engine.suggest(prefix, n, account=account)


def _ms_since(t0: float) -> int:
    return int((time.monotonic() - t0) * 1000)


def decode_sidecar_header(value: str) -> bytes:
    """Upload requests carry sidecar annotations base64-encoded in a header."""
    return base64.b64decode(value.encode("ascii"))


def encode_sidecar_header(sidecar: bytes) -> str:
    return base64.b64encode(sidecar).decode("ascii")


def load_users(path) -> list[dict]:
    """Users file: JSON list of {"user": ..., "key": ..., "account": ...}."""
    return json.loads(Path(path).read_text(encoding="utf-8"))


def token_response(token: AuthToken) -> dict:
    return {
        "token": token.token,
        "account": token.account,
        "expires_at": iso_utc(token.expires_at),
    }
