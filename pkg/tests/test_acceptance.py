"""Acceptance suite: one test per exit criterion, at its stated tolerance.

Each test prints a single PASS/FAIL line (visible with ``pytest -s`` or
``-rA``); tolerances are pinned here, not tuned elsewhere.
"""

import json
import random
import threading
import time

import pytest

from contentstore.detect import Detection
from contentstore.gateway import GatewayCore
from contentstore.indexdoc import FORBIDDEN_KEYS, IndexDocument, build_image_doc
from contentstore.detect import ImageExtraction
from contentstore.keywords import (
    DEFAULT_DIMENSION,
    DEFAULT_HASH_SEED,
    ReferenceEmbedder,
    extract_keyphrases,
    tokenize,
)
from contentstore.model import (
    ContentType,
    ImageFormat,
    ObjectDescriptor,
    canonical_path,
    content_hash,
    iso_utc,
)
from contentstore.ring import Device, build_ring, locate, rebalance
from contentstore.search import Filters, Query, SearchEngine, MODE_AND, MODE_OR
from contentstore.storage import HttpNode

from bench_corpus import CLASS_LABELS, build_index_corpus
from conftest import GatewayStack, USERS, local_cluster, sidecar_json
from fixtures import TEXT_COMPLEX_LANGEVIN, TEXT_DEEP_LEARNING
from oracles import doc_term_set, keyphrase_oracle, scan_search

CORPUS_SIZES = (1_000, 5_000, 20_000)


def report(name: str, ok: bool, detail: str = ""):
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {name}: {status}" + (f" ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def corpora():
    return {size: build_index_corpus(size, seed=size) for size in CORPUS_SIZES}


@pytest.fixture(scope="module")
def engines(corpora):
    out = {}
    for size, docs in corpora.items():
        engine = SearchEngine()
        for doc in docs:
            engine.index_doc(doc)
        out[size] = engine
    return out


class TestSearchOracleEquivalence:
    def test_every_query_matches_linear_scan(self, corpora, engines):
        rng = random.Random(2024)
        failures = 0
        checked = 0
        for size in CORPUS_SIZES:
            docs, engine = corpora[size], engines[size]
            term_sets = {doc.url_path: doc_term_set(doc) for doc in docs}
            queries = self._query_set(rng)
            for terms, mode, filters in queries:
                limit = len(docs) + 1  # full result set, exact comparison
                got = engine.search(Query(terms, mode, filters, limit))
                want = scan_search(docs, terms, mode, filters, limit, term_sets)
                checked += 1
                if [(h.url_path, h.score) for h in got.hits] != want:
                    failures += 1
        report(
            "search-oracle-equivalence",
            failures == 0,
            f"{checked} queries over {len(CORPUS_SIZES)} corpora, {failures} mismatches",
        )

    def _query_set(self, rng):
        single_terms = [tuple(tokenize(label)) for label in CLASS_LABELS]
        queries = [(terms, MODE_AND, Filters()) for terms in single_terms]
        pool = [tokenize(label)[0] for label in CLASS_LABELS]
        for _ in range(20):
            pair = tuple(rng.sample(pool, k=2))
            queries.append((pair, MODE_AND, Filters()))
            queries.append((pair, MODE_OR, Filters()))
        filter_variants = [
            Filters(content_type="image"),
            Filters(container="segment3"),
            Filters(size_min=512, size_max=4096),
            Filters(uploaded_after=iso_utc(1700002000)),
            Filters(content_type="image", container="segment1"),
        ]
        for filters in filter_variants:
            for _ in range(4):
                terms = (rng.choice(pool),)
                queries.append((terms, rng.choice([MODE_AND, MODE_OR]), filters))
        return queries


class TestQueryTimeScaling:
    RESULT_PAGE = 10  # matches the reference search engine's default page size

    def test_sweep_means_and_ordering(self, tmp_path_factory, engines):
        means = {}
        all_ordered = True
        samples_count = 0
        for size in CORPUS_SIZES:
            stack = GatewayStack(
                tmp_path_factory.mktemp(f"qt{size}"), engine=engines[size]
            )
            try:
                client = stack.client()
                for label in CLASS_LABELS[:10]:  # warmup
                    client.search(label, limit=self.RESULT_PAGE)
                query_ms = []
                for _ in range(5):
                    for label in CLASS_LABELS:
                        payload = client.search(label, limit=self.RESULT_PAGE)
                        query_ms.append(payload["query_millis"])
                        samples_count += 1
                        if payload["query_millis"] > payload["request_millis"]:
                            all_ordered = False
                means[size] = sum(query_ms) / len(query_ms)
            finally:
                stack.stop()
        ratio = means[20_000] / means[1_000]
        report(
            "query-time-scaling",
            ratio <= 1.25 and all_ordered,
            f"mean query ms {means[1_000]:.4f} (1k) -> {means[20_000]:.4f} (20k), "
            f"ratio {ratio:.3f} <= 1.25; query<=request in {samples_count} samples: "
            f"{all_ordered}",
        )


class TestReplicationDurability:
    N_UPLOADS = 500
    N_DEGRADED = 60

    def test_three_replicas_and_degraded_availability(self, tmp_path):
        stack = GatewayStack(tmp_path, n_devices=6, n_zones=3, part_power=6)
        try:
            self._run(stack)
        finally:
            stack.stop()

    def _run(self, stack):
        rng = random.Random(77)
        client = stack.client()
        uploads = {}
        for i in range(self.N_UPLOADS):
            name = f"obj_{i:04d}.jpg"
            body = b"\xff\xd8\xff" + rng.randbytes(rng.randint(64, 2048))
            label = rng.choice(CLASS_LABELS)
            status, payload = client.upload(
                "AUTH_test", "durability", name, body, sidecar=sidecar_json(label)
            )
            assert status == 201, payload
            assert payload["acks"] == 3
            uploads[f"/v1/AUTH_test/durability/{name}"] = body

        node_clients = {s.address: HttpNode(s.address) for s in stack.node_servers}
        replica_ok = True
        for url_path, body in uploads.items():
            path = canonical_path(*url_path[len("/v1/"):].split("/", 2))
            _, devices = locate(stack.ring, path)
            if len({d.id for d in devices}) != 3 or len({d.zone for d in devices}) != 3:
                replica_ok = False
                break
            for dev in devices:
                stored = node_clients[dev.node_address].get(path)
                if content_hash(stored.data) != content_hash(body):
                    replica_ok = False

        # kill one node: uploads keep succeeding, acks drop to 2 on its paths
        killed = stack.node_servers[0]
        killed_address = killed.address
        killed.stop()
        degraded_ok = True
        for i in range(self.N_DEGRADED):
            name = f"late_{i:04d}.jpg"
            body = b"\xff\xd8\xff" + rng.randbytes(256)
            status, payload = client.upload(
                "AUTH_test", "durability", name, body,
                sidecar=sidecar_json(rng.choice(CLASS_LABELS)),
            )
            if status != 201:
                degraded_ok = False
                break
            path = canonical_path("AUTH_test", "durability", name)
            _, devices = locate(stack.ring, path)
            expected_acks = 2 if any(
                d.node_address == killed_address for d in devices
            ) else 3
            if payload["acks"] != expected_acks:
                degraded_ok = False
                break
            uploads[f"/v1/AUTH_test/durability/{name}"] = body

        byte_identical = True
        for url_path, body in uploads.items():
            code, got, _ = client.get_object(url_path)
            if code != 200 or got != body:
                byte_identical = False
                break

        report(
            "replication-durability",
            replica_ok and degraded_ok and byte_identical,
            f"{self.N_UPLOADS} uploads x3 digest-verified zone-distinct replicas; "
            f"{self.N_DEGRADED} uploads with one node down; "
            f"{len(uploads)} objects read back byte-identical",
        )


class TestRingProperties:
    def test_dispersion_balance_and_rebalance_bound(self):
        rng = random.Random(4096)
        violations = []
        for case in range(200):
            n_zones = rng.randint(1, 6)
            per_zone = rng.randint(1, 5)
            if n_zones * per_zone < 3:
                continue
            devices = [
                Device(i, i % n_zones, f"10.0.0.{i}:6000", 1.0)
                for i in range(n_zones * per_zone)
            ]
            ring = build_ring(devices, part_power=8, replica_count=3)
            try:
                ring.validate()
            except ValueError as exc:
                violations.append(f"case {case}: {exc}")
                continue
            if n_zones >= 3 and ring.degraded_zones:
                violations.append(f"case {case}: degraded flag despite {n_zones} zones")
            loads = {d.id: 0 for d in devices}
            for row in ring.assignment:
                for dev_id in row:
                    loads[dev_id] += 1
            mean = sum(loads.values()) / len(loads)
            for dev_id, got in loads.items():
                if abs(got - mean) > 0.10 * mean + 1e-9:
                    violations.append(
                        f"case {case}: device {dev_id} load {got} vs mean {mean:.1f}"
                    )
                    break

        base = [Device(i, i, f"10.0.1.{i}:6000", 1.0) for i in range(4)]
        ring = build_ring(base, part_power=8, replica_count=3)
        grown = rebalance(ring, base + [Device(4, 4, "10.0.1.4:6000", 1.0)])
        moved = sum(
            len(set(o) - set(n))
            for o, n in zip(ring.assignment, grown.assignment)
        )
        total_slots = 3 * 256
        bound = total_slots / 5 + 0.10 * total_slots
        if moved > bound:
            violations.append(f"rebalance moved {moved} > bound {bound:.1f}")

        report(
            "ring-properties",
            not violations,
            violations[0] if violations else
            f"200 device sets validated; rebalance moved {moved} <= {bound:.1f}",
        )


class TestKeywordExtractionOracle:
    N_DOCS = 1_000

    def test_exhaustive_ranking_equivalence(self):
        rng = random.Random(31337)
        vocab = [
            "".join(rng.choice("abcdefghijklmnopqrstuvwxyz") for _ in range(rng.randint(3, 9)))
            for _ in range(400)
        ] + [str(n) for n in range(50)]
        embedder = ReferenceEmbedder()
        mismatches = 0
        not_contained = 0

        texts = [
            " ".join(rng.choice(vocab) for _ in range(rng.randint(3, 1000)))
            for _ in range(self.N_DOCS)
        ]
        texts += [TEXT_DEEP_LEARNING, TEXT_COMPLEX_LANGEVIN]

        for text in texts:
            got = [s.phrase.text for s in extract_keyphrases(text, embedder, k=3)]
            want = keyphrase_oracle(text, 3, DEFAULT_DIMENSION, DEFAULT_HASH_SEED)
            if got != want:
                mismatches += 1
            tokens = tokenize(text)
            trigrams = {" ".join(tokens[i : i + 3]) for i in range(len(tokens) - 2)}
            if any(phrase not in trigrams for phrase in got):
                not_contained += 1

        report(
            "keyword-extraction-oracle",
            mismatches == 0 and not_contained == 0,
            f"{len(texts)} documents (incl. both fixture texts): "
            f"{mismatches} ranking mismatches, {not_contained} containment breaks",
        )


class TestRefineryFilter:
    N_EXTRACTIONS = 10_000

    def test_no_box_or_class_keys_survive(self):
        rng = random.Random(5150)
        labels = CLASS_LABELS + ["bbox", "class_id"]
        desc = ObjectDescriptor.for_bytes(
            canonical_path("AUTH_test", "photos", "r.jpg"),
            b"\xff\xd8\xff",
            ContentType.image(ImageFormat.JPEG),
            uploaded_at=1700000000,
        )
        bad = 0
        for _ in range(self.N_EXTRACTIONS):
            detections = tuple(
                Detection(
                    rng.choice(labels),
                    rng.random(),
                    (rng.uniform(0, 400), rng.uniform(0, 400),
                     rng.uniform(1, 200), rng.uniform(1, 200)),
                    rng.randrange(91),
                )
                for _ in range(rng.randrange(10))
            )
            doc = build_image_doc(desc, ImageExtraction(detections, "rng", 0))
            if _keys_recursive(json.loads(doc.to_json())) & set(FORBIDDEN_KEYS):
                bad += 1
        report(
            "refinery-filter",
            bad == 0,
            f"{self.N_EXTRACTIONS} random extractions serialized; {bad} leaked keys",
        )


class TestPipelineOverlap:
    DETECTOR_DELAY = 0.3
    WRITE_DELAY = 0.3
    MARGIN_MS = 50

    def test_concurrent_phases(self, tmp_path):
        ring, cluster, _ = local_cluster(tmp_path)
        cluster.nodes = {
            addr: _DelayedNode(node, self.WRITE_DELAY)
            for addr, node in cluster.nodes.items()
        }
        core = GatewayCore(
            cluster, SearchEngine(), USERS,
            detector=_DelayedDetector(self.DETECTOR_DELAY),
            embedder=ReferenceEmbedder(),
        )
        token = core.authenticate("tester", "secret").token
        worst_total = 0
        bound_ok = True
        for i in range(3):
            path = canonical_path("AUTH_test", "photos", f"ov{i}.jpg")
            outcome = core.upload(token, path, b"\xff\xd8\xffbody", filename="ov.jpg")
            worst_total = max(worst_total, outcome.total_millis)
            if outcome.total_millis >= 600 - self.MARGIN_MS:
                bound_ok = False
            if outcome.total_millis > (
                outcome.extraction_millis + outcome.upload_millis + 250
            ):
                bound_ok = False
        report(
            "pipeline-overlap",
            bound_ok,
            f"300ms detector + 300ms write; worst total {worst_total}ms "
            f"< {600 - self.MARGIN_MS}ms",
        )


class TestIndexStoreConsistency:
    DURATION_S = 60
    WORKERS = 16

    def test_no_dangling_hits_under_concurrency(self, tmp_path):
        stack = GatewayStack(tmp_path, n_devices=3, n_zones=3, part_power=4)
        try:
            self._run(stack)
        finally:
            stack.stop()

    def _run(self, stack):
        stop = threading.Event()
        dangling = []
        errors = []
        searches_done = [0]
        uploads_done = [0]

        def uploader(worker):
            rng = random.Random(worker)
            client = stack.client()
            i = 0
            while not stop.is_set():
                label = rng.choice(CLASS_LABELS[:12])
                name = f"w{worker}_{i}.jpg"
                try:
                    status, _ = client.upload(
                        "AUTH_test", "live", name,
                        b"\xff\xd8\xff" + rng.randbytes(128),
                        sidecar=sidecar_json(label),
                    )
                    if status == 201:
                        uploads_done[0] += 1
                except Exception as exc:
                    errors.append(exc)
                i += 1

        def searcher(worker):
            rng = random.Random(1000 + worker)
            client = stack.client()
            while not stop.is_set():
                label = rng.choice(CLASS_LABELS[:12])
                try:
                    hits = client.search(label, limit=20)["hits"]
                    for hit in hits:
                        code, _, _ = client.get_object(hit["url_path"])
                        searches_done[0] += 1
                        if code != 200:
                            dangling.append((hit["url_path"], code))
                except Exception as exc:
                    errors.append(exc)

        threads = [
            threading.Thread(target=uploader, args=(w,)) for w in range(self.WORKERS // 2)
        ] + [
            threading.Thread(target=searcher, args=(w,)) for w in range(self.WORKERS // 2)
        ]
        for t in threads:
            t.start()
        time.sleep(self.DURATION_S)
        stop.set()
        for t in threads:
            t.join(timeout=30)

        report(
            "index-store-consistency",
            not dangling and not errors,
            f"{self.DURATION_S}s with {self.WORKERS} workers: "
            f"{uploads_done[0]} uploads, {searches_done[0]} hit-GETs, "
            f"{len(dangling)} dangling, {len(errors)} errors",
        )


def _keys_recursive(value):
    found = set()
    if isinstance(value, dict):
        for key, sub in value.items():
            found.add(key)
            found |= _keys_recursive(sub)
    elif isinstance(value, list):
        for sub in value:
            found |= _keys_recursive(sub)
    return found


class _DelayedNode:
    def __init__(self, inner, delay):
        self.inner = inner
        self.delay = delay
        self.address = inner.address

    def put(self, *args, **kwargs):
        time.sleep(self.delay)
        return self.inner.put(*args, **kwargs)

    def get(self, *args, **kwargs):
        return self.inner.get(*args, **kwargs)

    def head(self, *args, **kwargs):
        return self.inner.head(*args, **kwargs)

    def delete(self, *args, **kwargs):
        return self.inner.delete(*args, **kwargs)


class _DelayedDetector:
    name = "delayed-stub"

    def __init__(self, delay):
        self.delay = delay

    def detect(self, image):
        time.sleep(self.delay)
        return [Detection("dog", 0.9, (1, 1, 5, 5), 16)]
