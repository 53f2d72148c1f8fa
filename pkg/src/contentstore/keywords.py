"""Keyphrase extraction: top-k three-word phrases by cosine similarity.

Candidate trigrams are ranked against the whole-document embedding. The
embedder is pluggable: the built-in reference embedder is a deterministic
hashed bag-of-words (no model needed in CI); a real text-embedding service
can be plugged in over HTTP with the same contract.
"""

import math
import re
from dataclasses import dataclass
from typing import Protocol, Sequence

import requests

from .errors import (
    DimensionMismatch,
    EmbedderUnavailable,
    EmptyInput,
    ZeroVector,
)

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

EmbeddingVector = tuple[float, ...]


def tokenize(text: str) -> list[str]:
    """Unicode-aware split on non-alphanumeric runs, lowercased.

    Underscores and hyphens are separators; no empty tokens are produced.
    """
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class CandidatePhrase:
    """A contiguous three-token phrase and where it starts in the document."""

    tokens: tuple[str, str, str]
    position: int

    @property
    def text(self) -> str:
        return " ".join(self.tokens)


@dataclass(frozen=True)
class ScoredPhrase:
    phrase: CandidatePhrase
    score: float


def candidates(tokens: Sequence[str]) -> list[CandidatePhrase]:
    """All consecutive trigrams in order, deduplicated by text.

    The earliest occurrence wins on duplicates; fewer than three tokens
    yields no candidates.
    """
    seen: set[tuple[str, ...]] = set()
    out: list[CandidatePhrase] = []
    for i in range(len(tokens) - 2):
        tri = (tokens[i], tokens[i + 1], tokens[i + 2])
        if tri in seen:
            continue
        seen.add(tri)
        out.append(CandidatePhrase(tri, i))
    return out


def cosine(a: Sequence[float], b: Sequence[float]) -> float:
    """dot(a,b) / (|a|·|b|); raises on dimension mismatch or zero vectors."""
    if len(a) != len(b):
        raise DimensionMismatch(f"{len(a)} vs {len(b)}")
    dot = 0.0
    na = 0.0
    nb = 0.0
    for x, y in zip(a, b):
        dot += x * y
        na += x * x
        nb += y * y
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("cosine undefined for an all-zero vector")
    return dot / math.sqrt(na * nb)


_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1

DEFAULT_DIMENSION = 256
DEFAULT_HASH_SEED = 0x5EED


def _fnv1a64(data: bytes, seed: int) -> int:
    h = (_FNV_OFFSET ^ seed) & _MASK64
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def reference_embed(
    tokens: Sequence[str],
    dimension: int = DEFAULT_DIMENSION,
    seed: int = DEFAULT_HASH_SEED,
) -> EmbeddingVector:
    """Hashed bag-of-words vector: token -> bucket via seeded 64-bit FNV-1a.

    Deterministic across runs and platforms; component sum equals the token
    count, so non-empty input never yields a zero vector.
    """
    if not tokens:
        raise EmptyInput("cannot embed an empty token list")
    counts = [0.0] * dimension
    for token in tokens:
        counts[_fnv1a64(token.encode("utf-8"), seed) % dimension] += 1.0
    return tuple(counts)


class Embedder(Protocol):
    """Text-vectorization contract: one fixed-dimension vector per input."""

    dimension: int

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]: ...


class ReferenceEmbedder:
    """Deterministic hashed-term-frequency embedder (tokenizes internally)."""

    def __init__(self, dimension: int = DEFAULT_DIMENSION, seed: int = DEFAULT_HASH_SEED):
        self.dimension = dimension
        self.seed = seed

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        return [reference_embed(tokenize(t), self.dimension, self.seed) for t in texts]


class HttpEmbedder:
    """Adapter for an embedding service: POST /embed {"texts": [...]}."""

    def __init__(self, url: str, dimension: int, timeout: float = 30.0):
        self.url = url.rstrip("/")
        self.dimension = dimension
        self.timeout = timeout
        self._session = requests.Session()

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        try:
            resp = self._session.post(
                f"{self.url}/embed", json={"texts": list(texts)}, timeout=self.timeout
            )
        except requests.RequestException as exc:
            raise EmbedderUnavailable(str(exc)) from exc
        if resp.status_code != 200:
            raise EmbedderUnavailable(f"embedder replied HTTP {resp.status_code}")
        try:
            vectors = resp.json()["vectors"]
            out = [tuple(float(x) for x in vec) for vec in vectors]
        except (ValueError, KeyError, TypeError) as exc:
            raise EmbedderUnavailable(f"malformed embedder reply: {exc}") from exc
        if len(out) != len(texts) or any(len(v) != self.dimension for v in out):
            raise EmbedderUnavailable("embedder reply has wrong shape")
        return out


def extract_keyphrases(text: str, embedder: Embedder, k: int = 3) -> list[ScoredPhrase]:
    """Top-k candidate trigrams by cosine similarity to the whole document.

    Ties break by earlier position, then lexicographic text. Every returned
    phrase occurs verbatim as a token trigram of the document. Documents
    with fewer than three tokens yield an empty list; documents with no
    tokens at all raise EmptyInput.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    tokens = tokenize(text)
    if not tokens:
        raise EmptyInput("document has no tokens")
    cands = candidates(tokens)
    if not cands:
        return []

    doc_vec = embedder.embed([text])[0]
    cand_vecs = embedder.embed([c.text for c in cands])
    scored = [
        ScoredPhrase(c, cosine(vec, doc_vec)) for c, vec in zip(cands, cand_vecs)
    ]
    scored.sort(key=lambda s: (-s.score, s.phrase.position, s.phrase.text))
    return scored[:k]
