"""Embedded search engine: inverted index, boolean+filtered queries,
completion suggester, and query-time accounting.

Documents are keyed by their canonical url_path, which doubles as the
internal document id: postings stay strictly-increasing ordered sets, and
AND evaluation can walk them in url_path order and stop at the result
limit, which keeps query time nearly flat as the corpus grows. Analysis is
shared with keyphrase extraction so index terms and query terms always
agree.

Many callers may search concurrently; writes are serialized, and a search
observes either the pre- or post-state of any single upsert, never a torn
document.
"""

import threading
import time
from bisect import bisect_left, insort
from dataclasses import dataclass, field
from pathlib import Path

from .errors import BadQuery, InvalidDocument
from .indexdoc import IndexDocument
from .keywords import tokenize

MODE_AND = "AND"
MODE_OR = "OR"

DEFAULT_LIMIT = 50


@dataclass(frozen=True)
class Filters:
    """Post-match filters; uploaded bounds are ISO-8601 UTC strings."""

    content_type: str | None = None
    account: str | None = None
    container: str | None = None
    size_min: int | None = None
    size_max: int | None = None
    uploaded_after: str | None = None
    uploaded_before: str | None = None

    def validate(self) -> None:
        if (
            self.size_min is not None
            and self.size_max is not None
            and self.size_min > self.size_max
        ):
            raise BadQuery("size range is inverted")
        if (
            self.uploaded_after is not None
            and self.uploaded_before is not None
            and self.uploaded_after > self.uploaded_before
        ):
            raise BadQuery("uploaded_at range is inverted")

    def matches(self, doc: IndexDocument) -> bool:
        if self.content_type is not None and doc.content_type != self.content_type:
            return False
        if self.account is not None and doc.account != self.account:
            return False
        if self.container is not None and doc.container != self.container:
            return False
        if self.size_min is not None and doc.size_bytes < self.size_min:
            return False
        if self.size_max is not None and doc.size_bytes > self.size_max:
            return False
        if self.uploaded_after is not None and doc.uploaded_at < self.uploaded_after:
            return False
        if self.uploaded_before is not None and doc.uploaded_at > self.uploaded_before:
            return False
        return True


@dataclass(frozen=True)
class Query:
    terms: tuple[str, ...]
    mode: str = MODE_AND
    filters: Filters = field(default_factory=Filters)
    limit: int = DEFAULT_LIMIT

    def validate(self) -> None:
        if not self.terms:
            raise BadQuery("query needs at least one term")
        if any(t != t.lower() or not t for t in self.terms):
            raise BadQuery("terms must be non-empty and lowercase")
        if self.mode not in (MODE_AND, MODE_OR):
            raise BadQuery(f"unknown mode: {self.mode!r}")
        if self.limit < 1:
            raise BadQuery("limit must be positive")
        self.filters.validate()

    @classmethod
    def from_text(cls, text: str, mode: str = MODE_AND, filters: Filters | None = None,
                  limit: int = DEFAULT_LIMIT) -> "Query":
        """Analyze free text with the shared tokenizer."""
        return cls(tuple(tokenize(text)), mode, filters or Filters(), limit)


@dataclass(frozen=True)
class Hit:
    url_path: str
    doc: IndexDocument
    score: int


@dataclass
class QueryResponse:
    hits: list[Hit]
    query_millis: float
    request_millis: float = 0.0

    def to_dict(self) -> dict:
        return {
            "hits": [
                {"url_path": h.url_path, "doc": h.doc.to_dict(), "score": h.score}
                for h in self.hits
            ],
            "query_millis": self.query_millis,
            "request_millis": self.request_millis,
        }


class _TrieNode:
    __slots__ = ("children", "is_term")

    def __init__(self):
        self.children: dict[str, _TrieNode] = {}
        self.is_term = False


class _Trie:
    """Prefix trie over indexed terms, for the completion suggester."""

    def __init__(self):
        self.root = _TrieNode()

    def insert(self, term: str) -> None:
        node = self.root
        for ch in term:
            node = node.children.setdefault(ch, _TrieNode())
        node.is_term = True

    def remove(self, term: str) -> None:
        chain = [self.root]
        for ch in term:
            nxt = chain[-1].children.get(ch)
            if nxt is None:
                return
            chain.append(nxt)
        chain[-1].is_term = False
        # prune empty branches bottom-up
        for i in range(len(term) - 1, -1, -1):
            node = chain[i + 1]
            if node.is_term or node.children:
                break
            del chain[i].children[term[i]]

    def terms_with_prefix(self, prefix: str) -> list[str]:
        node = self.root
        for ch in prefix:
            node = node.children.get(ch)
            if node is None:
                return []
        out: list[str] = []
        stack = [(node, prefix)]
        while stack:
            cur, text = stack.pop()
            if cur.is_term:
                out.append(text)
            for ch, child in cur.children.items():
                stack.append((child, text + ch))
        return out


class SnapshotLog:
    """Write-ahead snapshot: one canonical IndexDocument JSON per line.

    Replay order does not matter beyond last-write-wins per url_path, so
    upserts can simply append; deletes compact the file.
    """

    def __init__(self, path: Path):
        self.path = Path(path)

    def load(self) -> dict[str, IndexDocument]:
        docs: dict[str, IndexDocument] = {}
        if not self.path.exists():
            return docs
        with self.path.open("r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    doc = IndexDocument.from_json(line)
                    docs[doc.url_path] = doc
        return docs

    def append(self, doc: IndexDocument) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a", encoding="utf-8") as fh:
            fh.write(doc.to_json() + "\n")
            fh.flush()

    def rewrite(self, docs: list[IndexDocument]) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        tmp = self.path.with_suffix(self.path.suffix + ".tmp")
        with tmp.open("w", encoding="utf-8") as fh:
            for doc in docs:
                fh.write(doc.to_json() + "\n")
            fh.flush()
        tmp.replace(self.path)


def analyze(doc: IndexDocument) -> set[str]:
    """Index terms of a document: analyzed object name plus contents."""
    terms = set(tokenize(doc.object_name))
    for entry in doc.contents:
        terms.update(tokenize(entry))
    return terms


class SearchEngine:
    """In-memory inverted index with optional on-disk snapshot."""

    def __init__(self, snapshot_path: Path | str | None = None):
        self._docs: dict[str, IndexDocument] = {}
        self._postings: dict[str, list[str]] = {}
        self._account_df: dict[str, dict[str, int]] = {}
        self._trie = _Trie()
        self._lock = threading.Lock()
        self._snapshot = SnapshotLog(Path(snapshot_path)) if snapshot_path else None
        if self._snapshot is not None:
            for doc in self._snapshot.load().values():
                self._apply_upsert(doc)

    # --- writes ---

    def index_doc(self, doc: IndexDocument) -> str:
        """Upsert a document; returns its internal id (the url_path)."""
        doc.validate()
        with self._lock:
            if self._snapshot is not None:
                self._snapshot.append(doc)
            self._apply_upsert(doc)
        return doc.url_path

    def delete_doc(self, url_path: str) -> bool:
        with self._lock:
            if url_path not in self._docs:
                return False
            self._remove_postings(url_path)
            del self._docs[url_path]
            if self._snapshot is not None:
                self._snapshot.rewrite(list(self._docs.values()))
        return True

    def _apply_upsert(self, doc: IndexDocument) -> None:
        if doc.url_path in self._docs:
            self._remove_postings(doc.url_path)
        self._docs[doc.url_path] = doc
        for term in analyze(doc):
            posting = self._postings.setdefault(term, [])
            if not posting:
                self._trie.insert(term)
            insort(posting, doc.url_path)
            per_account = self._account_df.setdefault(term, {})
            per_account[doc.account] = per_account.get(doc.account, 0) + 1

    def _remove_postings(self, url_path: str) -> None:
        old = self._docs[url_path]
        for term in analyze(old):
            posting = self._postings.get(term)
            if posting is None:
                continue
            i = bisect_left(posting, url_path)
            if i < len(posting) and posting[i] == url_path:
                del posting[i]
            per_account = self._account_df.get(term, {})
            if old.account in per_account:
                per_account[old.account] -= 1
                if per_account[old.account] <= 0:
                    del per_account[old.account]
            if not posting:
                del self._postings[term]
                self._account_df.pop(term, None)
                self._trie.remove(term)

    # --- reads ---

    def doc_count(self) -> int:
        return len(self._docs)

    def get_doc(self, url_path: str) -> IndexDocument | None:
        return self._docs.get(url_path)

    def search(self, q: Query) -> QueryResponse:
        """Evaluate a query; query_millis covers index evaluation only."""
        q.validate()
        start = time.perf_counter()
        with self._lock:
            if q.mode == MODE_AND:
                hits = self._search_and(q)
            else:
                hits = self._search_or(q)
        query_millis = (time.perf_counter() - start) * 1000.0
        return QueryResponse(hits, query_millis)

    def _search_and(self, q: Query) -> list[Hit]:
        postings = []
        for term in set(q.terms):
            posting = self._postings.get(term)
            if posting is None:
                return []
            postings.append(posting)
        postings.sort(key=len)
        lead, rest = postings[0], postings[1:]
        score = len(set(q.terms))
        hits: list[Hit] = []
        for path in lead:
            if all(_contains(p, path) for p in rest):
                doc = self._docs[path]
                if q.filters.matches(doc):
                    hits.append(Hit(path, doc, score))
                    if len(hits) >= q.limit:
                        break
        return hits

    def _search_or(self, q: Query) -> list[Hit]:
        counts: dict[str, int] = {}
        for term in set(q.terms):
            for path in self._postings.get(term, ()):
                counts[path] = counts.get(path, 0) + 1
        ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        hits: list[Hit] = []
        for path, score in ranked:
            doc = self._docs[path]
            if q.filters.matches(doc):
                hits.append(Hit(path, doc, score))
                if len(hits) >= q.limit:
                    break
        return hits

    def suggest(self, prefix: str, n: int, account: str | None = None) -> list[str]:
        """Up to n indexed terms with the prefix, by document frequency
        descending then lexicographic."""
        prefix = prefix.lower()
        if not prefix:
            raise BadQuery("prefix must be non-empty")
        if n < 1:
            raise BadQuery("n must be positive")
        with self._lock:
            terms = self._trie.terms_with_prefix(prefix)
            scored = []
            for term in terms:
                df = self._doc_frequency(term, account)
                if df > 0:
                    scored.append((-df, term))
        scored.sort()
        return [term for _, term in scored[:n]]

    def _doc_frequency(self, term: str, account: str | None) -> int:
        if account is None:
            return len(self._postings.get(term, ()))
        return self._account_df.get(term, {}).get(account, 0)


def _contains(sorted_list: list[str], value: str) -> bool:
    i = bisect_left(sorted_list, value)
    return i < len(sorted_list) and sorted_list[i] == value
