"""Exception hierarchy shared across the store, pipeline, and gateway."""


class ContentStoreError(Exception):
    """Base class for every error raised by this package."""


# --- paths and hashing ---

class EmptyComponent(ContentStoreError):
    """A path component (account, container, object) is empty."""


class IllegalSlash(ContentStoreError):
    """Account or container contains a '/' character."""


# --- classification ---

class UnsupportedType(ContentStoreError):
    """Payload matches no supported image or document format."""


# --- detector adapters ---

class DetectorUnavailable(ContentStoreError):
    """The object-detector backend could not be reached or errored."""


class DetectorProtocolError(ContentStoreError):
    """The detector backend replied with something outside its protocol."""


class MalformedSidecar(DetectorProtocolError):
    """A sidecar annotation file does not follow the expected schema."""


# --- embeddings and keyphrases ---

class DimensionMismatch(ContentStoreError):
    """Two vectors of different dimensions were combined."""


class ZeroVector(ContentStoreError):
    """Cosine similarity is undefined for an all-zero vector."""


class EmptyInput(ContentStoreError):
    """An operation that requires content received none."""


class EmbedderUnavailable(ContentStoreError):
    """The text-embedding backend could not be reached or errored."""


class TextExtractionError(ContentStoreError):
    """Document text could not be extracted (no reader, or parse failure)."""


# --- search engine ---

class InvalidDocument(ContentStoreError):
    """An index document violates its schema invariants."""


class BadQuery(ContentStoreError):
    """A search or suggest request is malformed."""


# --- ring ---

class InsufficientDevices(ContentStoreError):
    """Fewer devices than replicas and degraded mode not allowed."""


# --- storage ---

class DiskFull(ContentStoreError):
    """The node ran out of space; no partial object was left behind."""


class NotFound(ContentStoreError):
    """Object absent from the node(s) consulted."""


class CorruptReplica(ContentStoreError):
    """Every located replica failed digest verification."""


class QuorumFailed(ContentStoreError):
    """A replicated write acked on fewer than a majority of replicas."""

    def __init__(self, message: str, receipt=None):
        super().__init__(message)
        self.receipt = receipt


# --- gateway ---

class Unauthorized(ContentStoreError):
    """Missing, unknown, or expired credentials/token."""


class Forbidden(ContentStoreError):
    """Token is valid but does not authorize this account's paths."""
