import random
import threading

import pytest

from contentstore.errors import BadQuery, InvalidDocument
from contentstore.indexdoc import IndexDocument
from contentstore.model import iso_utc
from contentstore.search import (
    Filters,
    Query,
    SearchEngine,
    MODE_AND,
    MODE_OR,
)

from oracles import scan_search, scan_suggest

LABELS = ["cat", "dog", "car", "horse", "person", "zebra", "bench", "deep"]


def make_doc(i, contents, account="AUTH_test", container="photos",
             content_type="image", size=100, uploaded=1700000000):
    name = f"img_{i:05d}.jpg"
    return IndexDocument(
        object_name=name,
        account=account,
        container=container,
        url_path=f"/v1/{account}/{container}/{name}",
        content_type=content_type,
        contents=tuple(contents),
        size_bytes=size,
        uploaded_at=iso_utc(uploaded),
    )


def build_corpus(n, seed=7, account="AUTH_test"):
    rng = random.Random(seed)
    docs = []
    for i in range(n):
        contents = rng.sample(LABELS, k=rng.randint(1, 3))
        container = rng.choice(["photos", "scans"])
        kind = rng.choice(["image", "document"])
        docs.append(
            make_doc(i, contents, account=account, container=container,
                     content_type=kind, size=rng.randint(10, 5000),
                     uploaded=1700000000 + rng.randint(0, 10000))
        )
    return docs


class TestIndexing:
    def test_round_trip_single_term(self):
        engine = SearchEngine()
        engine.index_doc(make_doc(1, ["dog"]))
        response = engine.search(Query(("dog",)))
        assert [h.url_path for h in response.hits] == ["/v1/AUTH_test/photos/img_00001.jpg"]

    def test_upsert_replaces_previous_version(self):
        engine = SearchEngine()
        doc_v1 = make_doc(1, ["dog"])
        doc_v2 = make_doc(1, ["cat"])
        engine.index_doc(doc_v1)
        engine.index_doc(doc_v2)
        assert engine.search(Query(("dog",))).hits == []
        hits = engine.search(Query(("cat",))).hits
        assert [h.url_path for h in hits] == [doc_v2.url_path]
        assert hits[0].doc == doc_v2

    def test_phrases_are_word_tokenized(self):
        engine = SearchEngine()
        engine.index_doc(make_doc(1, ["deep neural networks"], content_type="document"))
        assert len(engine.search(Query(("neural",))).hits) == 1

    def test_object_name_terms_indexed(self):
        engine = SearchEngine()
        engine.index_doc(make_doc(7, []))
        assert len(engine.search(Query(("img",))).hits) == 1

    def test_invalid_doc_rejected(self):
        engine = SearchEngine()
        doc = make_doc(1, ["dog"])
        broken = IndexDocument.from_dict({**doc.to_dict(), "content_type": "video"})
        with pytest.raises(InvalidDocument):
            engine.index_doc(broken)

    def test_returned_id_resolves(self):
        engine = SearchEngine()
        doc = make_doc(3, ["cat"])
        internal_id = engine.index_doc(doc)
        assert engine.get_doc(internal_id) == doc


class TestBooleanSearch:
    def setup_method(self):
        self.engine = SearchEngine()
        self.d1 = make_doc(1, ["cat", "dog"])
        self.d2 = make_doc(2, ["cat"])
        self.engine.index_doc(self.d1)
        self.engine.index_doc(self.d2)

    def test_and_intersection(self):
        hits = self.engine.search(Query(("cat", "dog"), MODE_AND)).hits
        assert [h.url_path for h in hits] == [self.d1.url_path]

    def test_or_union(self):
        hits = self.engine.search(Query(("dog", "fish"), MODE_OR)).hits
        assert [h.url_path for h in hits] == [self.d1.url_path]

    def test_unknown_term_empty(self):
        assert self.engine.search(Query(("zebra",))).hits == []

    def test_or_scores_by_matched_terms(self):
        hits = self.engine.search(Query(("cat", "dog"), MODE_OR)).hits
        assert [(h.url_path, h.score) for h in hits] == [
            (self.d1.url_path, 2),
            (self.d2.url_path, 1),
        ]

    def test_limit(self):
        hits = self.engine.search(Query(("cat",), limit=1)).hits
        assert len(hits) == 1
        assert hits[0].url_path == self.d1.url_path  # url_path ascending

    def test_query_validation(self):
        with pytest.raises(BadQuery):
            self.engine.search(Query(()))
        with pytest.raises(BadQuery):
            self.engine.search(Query(("UPPER",)))
        with pytest.raises(BadQuery):
            self.engine.search(Query(("cat",), mode="XOR"))
        with pytest.raises(BadQuery):
            self.engine.search(Query(("cat",), limit=0))
        with pytest.raises(BadQuery):
            Query(("cat",), filters=Filters(size_min=10, size_max=1)).validate()


class TestFilters:
    def setup_method(self):
        self.engine = SearchEngine()
        self.image = make_doc(1, ["dog"], content_type="image", size=50,
                              uploaded=1700000100)
        self.document = make_doc(2, ["dog"], content_type="document", size=5000,
                                 uploaded=1700009000, container="scans")
        self.engine.index_doc(self.image)
        self.engine.index_doc(self.document)

    def search_paths(self, **filter_kwargs):
        q = Query(("dog",), filters=Filters(**filter_kwargs))
        return [h.url_path for h in self.engine.search(q).hits]

    def test_content_type(self):
        assert self.search_paths(content_type="document") == [self.document.url_path]

    def test_container(self):
        assert self.search_paths(container="scans") == [self.document.url_path]

    def test_account(self):
        assert self.search_paths(account="AUTH_other") == []

    def test_size_range(self):
        assert self.search_paths(size_min=100) == [self.document.url_path]
        assert self.search_paths(size_max=100) == [self.image.url_path]

    def test_uploaded_range(self):
        assert self.search_paths(uploaded_after=iso_utc(1700005000)) == [
            self.document.url_path
        ]


class TestDelete:
    def test_lifecycle(self):
        engine = SearchEngine()
        doc = make_doc(1, ["dog"])
        engine.index_doc(doc)
        assert engine.delete_doc(doc.url_path) is True
        assert engine.search(Query(("dog",))).hits == []
        assert engine.delete_doc(doc.url_path) is False
        engine.index_doc(doc)
        assert len(engine.search(Query(("dog",))).hits) == 1

    def test_suggester_frequencies_follow_deletes(self):
        engine = SearchEngine()
        a, b = make_doc(1, ["dog"]), make_doc(2, ["dog"])
        engine.index_doc(a)
        engine.index_doc(b)
        engine.delete_doc(a.url_path)
        assert engine.suggest("do", 5) == ["dog"]
        engine.delete_doc(b.url_path)
        assert engine.suggest("do", 5) == []


class TestSuggest:
    def setup_method(self):
        self.engine = SearchEngine()
        # frequencies: cat in 3 docs, dog in 2, car in 1
        for i, contents in enumerate(
            [["cat", "dog"], ["cat"], ["cat", "dog"], ["car"]]
        ):
            self.engine.index_doc(make_doc(i, contents, container="c"))

    def test_frequency_then_lexicographic(self):
        assert self.engine.suggest("ca", 5) == ["cat", "car"]

    def test_no_match(self):
        assert self.engine.suggest("z", 5) == []

    def test_exact_term_included(self):
        assert "cat" in self.engine.suggest("cat", 5)

    def test_n_limits(self):
        assert self.engine.suggest("c", 1) == ["cat"]

    def test_prefix_required(self):
        with pytest.raises(BadQuery):
            self.engine.suggest("", 5)

    def test_account_scoping(self):
        self.engine.index_doc(
            make_doc(9, ["cobra"], account="AUTH_other", container="c")
        )
        assert "cobra" in self.engine.suggest("c", 10)
        assert "cobra" not in self.engine.suggest("c", 10, account="AUTH_test")
        assert self.engine.suggest("c", 10, account="AUTH_other") == ["cobra"]

    def test_matches_scan_oracle(self):
        docs = build_corpus(300)
        engine = SearchEngine()
        for doc in docs:
            engine.index_doc(doc)
        for prefix in ("c", "ca", "d", "z", "img", "p"):
            got = engine.suggest(prefix, 4)
            want = scan_suggest(docs, prefix, 4)
            assert got == want, prefix


class TestScanOracleEquivalence:
    def test_random_corpus_all_modes_and_filters(self):
        docs = build_corpus(500)
        engine = SearchEngine()
        for doc in docs:
            engine.index_doc(doc)
        rng = random.Random(3)
        filter_pool = [
            Filters(),
            Filters(content_type="image"),
            Filters(container="scans"),
            Filters(size_min=50, size_max=2500),
            Filters(uploaded_after=iso_utc(1700003000)),
            Filters(content_type="document", container="photos"),
        ]
        for _ in range(120):
            terms = tuple(rng.sample(LABELS + ["missing"], k=rng.randint(1, 3)))
            mode = rng.choice([MODE_AND, MODE_OR])
            filters = rng.choice(filter_pool)
            limit = rng.choice([3, 50, 10_000])
            got = engine.search(Query(terms, mode, filters, limit))
            want = scan_search(docs, terms, mode, filters, limit)
            assert [(h.url_path, h.score) for h in got.hits] == want

    def test_query_millis_nonnegative(self):
        engine = SearchEngine()
        engine.index_doc(make_doc(1, ["dog"]))
        response = engine.search(Query(("dog",)))
        assert response.query_millis >= 0.0


class TestSnapshot:
    def test_replay_after_restart(self, tmp_path):
        snap = tmp_path / "index.jsonl"
        engine = SearchEngine(snapshot_path=snap)
        docs = [make_doc(i, ["dog"] if i % 2 else ["cat"]) for i in range(10)]
        for doc in docs:
            engine.index_doc(doc)
        engine.index_doc(make_doc(0, ["horse"]))  # upsert
        engine.delete_doc(docs[1].url_path)

        reopened = SearchEngine(snapshot_path=snap)
        assert reopened.doc_count() == 9
        assert reopened.search(Query(("horse",))).hits[0].url_path == docs[0].url_path
        assert all(
            h.url_path != docs[1].url_path
            for h in reopened.search(Query(("dog",), limit=100)).hits
        )

    def test_snapshot_is_canonical_json_lines(self, tmp_path):
        snap = tmp_path / "index.jsonl"
        engine = SearchEngine(snapshot_path=snap)
        doc = make_doc(1, ["dog"])
        engine.index_doc(doc)
        assert snap.read_text(encoding="utf-8") == doc.to_json() + "\n"


class TestConcurrency:
    def test_concurrent_upserts_and_searches_never_torn(self):
        engine = SearchEngine()
        stop = threading.Event()
        errors = []

        def writer(worker):
            i = 0
            while not stop.is_set():
                engine.index_doc(make_doc(worker, ["dog", "cat"] if i % 2 else ["dog"]))
                i += 1

        def reader():
            while not stop.is_set():
                for hit in engine.search(Query(("dog",), limit=100)).hits:
                    # a torn document would break url_path/doc agreement
                    if hit.doc.url_path != hit.url_path:
                        errors.append(hit)

        threads = [threading.Thread(target=writer, args=(w,)) for w in range(4)]
        threads += [threading.Thread(target=reader) for _ in range(4)]
        for t in threads:
            t.start()
        import time

        time.sleep(1.0)
        stop.set()
        for t in threads:
            t.join()
        assert errors == []
