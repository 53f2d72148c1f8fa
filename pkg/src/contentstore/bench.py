"""Benchmark harness: synthetic corpora, bulk ingest, keyword query sweep.

Mirrors the timing methodology of the upload and query experiments at desk
scale: per-file detection/upload/total times during ingest, then an
80-keyword sweep (one keyword per object class) measuring engine query
time against full request time, aggregated to one CSV row per corpus.
"""

import json
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .client import GatewayClient

# The 80 object classes of the detection dataset the image corpus mimics;
# also the default keyword sweep.
CLASS_NAMES = [
    "person", "bicycle", "car", "motorcycle", "airplane", "bus", "train",
    "truck", "boat", "traffic light", "fire hydrant", "stop sign",
    "parking meter", "bench", "bird", "cat", "dog", "horse", "sheep", "cow",
    "elephant", "bear", "zebra", "giraffe", "backpack", "umbrella",
    "handbag", "tie", "suitcase", "frisbee", "skis", "snowboard",
    "sports ball", "kite", "baseball bat", "baseball glove", "skateboard",
    "surfboard", "tennis racket", "bottle", "wine glass", "cup", "fork",
    "knife", "spoon", "bowl", "banana", "apple", "sandwich", "orange",
    "broccoli", "carrot", "hot dog", "pizza", "donut", "cake", "chair",
    "couch", "potted plant", "bed", "dining table", "toilet", "tv",
    "laptop", "mouse", "remote", "keyboard", "cell phone", "microwave",
    "oven", "toaster", "sink", "refrigerator", "book", "clock", "vase",
    "scissors", "teddy bear", "hair drier", "toothbrush",
]

_JPEG_MAGIC = b"\xff\xd8\xff\xe0"

CSV_HEADER = (
    "corpus_size,avg_detection_ms,avg_upload_ms,total_pipeline_ms,"
    "avg_query_ms,avg_request_ms,keyword_count"
)


@dataclass
class BenchReport:
    corpus_size: int = 0
    avg_detection_millis: float = 0.0
    avg_upload_millis: float = 0.0
    total_pipeline_millis: float = 0.0
    avg_query_millis: float = 0.0
    avg_request_millis: float = 0.0
    keyword_count: int = 0

    def csv_row(self) -> str:
        return (
            f"{self.corpus_size},{self.avg_detection_millis:.3f},"
            f"{self.avg_upload_millis:.3f},{self.total_pipeline_millis:.3f},"
            f"{self.avg_query_millis:.3f},{self.avg_request_millis:.3f},"
            f"{self.keyword_count}"
        )


def generate_corpus(
    out_dir: Path | str,
    images: int,
    classes: int = 80,
    seed: int = 1,
    payload_bytes: int = 2048,
) -> list[Path]:
    """Synthetic image corpus: random payloads plus sidecar label files.

    Labels are drawn from the first ``classes`` class names so an
    80-keyword sweep has matching content to find.
    """
    rng = random.Random(seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = CLASS_NAMES[:classes]
    written = []
    for i in range(images):
        payload = _JPEG_MAGIC + rng.randbytes(max(payload_bytes - len(_JPEG_MAGIC), 16))
        labels = rng.sample(names, k=rng.randint(1, min(4, len(names))))
        detections = [
            {
                "label": label,
                "confidence": round(rng.uniform(0.3, 0.99), 4),
                "bbox": [
                    rng.randint(0, 300),
                    rng.randint(0, 300),
                    rng.randint(10, 200),
                    rng.randint(10, 200),
                ],
                "class_id": names.index(label),
            }
            for label in labels
        ]
        img = out / f"img_{i:05d}.jpg"
        img.write_bytes(payload)
        (out / f"img_{i:05d}.jpg.labels.json").write_text(
            json.dumps({"detections": detections}), encoding="utf-8"
        )
        written.append(img)
    return written


@dataclass
class IngestStats:
    corpus_size: int
    uploaded: int
    failed: int
    stored_not_extracted: int
    avg_detection_millis: float
    avg_upload_millis: float
    total_pipeline_millis: float

    @property
    def failure_rate(self) -> float:
        return self.failed / self.corpus_size if self.corpus_size else 0.0


def ingest(
    directory: Path | str,
    client: GatewayClient,
    account: str,
    container: str,
    concurrency: int = 4,
    log=lambda msg: None,
) -> IngestStats:
    """Upload every non-sidecar file in a directory, gathering timings.

    Per-file failures are logged and the run continues; callers decide the
    exit policy from the failure rate.
    """
    files = sorted(
        p for p in Path(directory).iterdir()
        if p.is_file() and not p.name.endswith(".labels.json")
    )
    detection_ms: list[float] = []
    upload_ms: list[float] = []
    failures = 0
    not_extracted = 0
    started = time.monotonic()

    def upload_one(path: Path):
        sidecar_file = path.with_name(path.name + ".labels.json")
        sidecar = sidecar_file.read_bytes() if sidecar_file.exists() else None
        status, payload = client.upload(
            account, container, path.name, path.read_bytes(),
            filename=path.name, sidecar=sidecar,
        )
        return path, status, payload

    with ThreadPoolExecutor(max_workers=concurrency) as pool:
        for path, status, payload in pool.map(upload_one, files):
            if status not in (201, 207):
                failures += 1
                log(f"FAIL {path.name}: HTTP {status} {payload.get('error', '')}")
                continue
            if status == 207:
                log(f"PARTIAL {path.name}: stored without extraction")
            if (
                payload.get("status") == "partial"
                or payload.get("content_type") == "other"
                or not payload.get("indexed", False)
            ):
                not_extracted += 1
            detection_ms.append(payload.get("extraction_millis", 0))
            upload_ms.append(payload.get("upload_millis", 0))

    total_ms = (time.monotonic() - started) * 1000.0
    return IngestStats(
        corpus_size=len(files),
        uploaded=len(files) - failures,
        failed=failures,
        stored_not_extracted=not_extracted,
        avg_detection_millis=_mean(detection_ms),
        avg_upload_millis=_mean(upload_ms),
        total_pipeline_millis=total_ms,
    )


@dataclass
class SweepStats:
    keyword_count: int
    samples: list[tuple[float, float]]  # (query_millis, request_millis)

    @property
    def avg_query_millis(self) -> float:
        return _mean([s[0] for s in self.samples])

    @property
    def avg_request_millis(self) -> float:
        return _mean([s[1] for s in self.samples])


def query_sweep(
    client: GatewayClient,
    keywords: list[str],
    repeats: int = 5,
    limit: int = 50,
) -> SweepStats:
    """Run each keyword ``repeats`` times, sequentially, collecting both
    engine query time and full request time per sample."""
    if not keywords:
        raise ValueError("keywords must be non-empty")
    samples: list[tuple[float, float]] = []
    for _ in range(repeats):
        for keyword in keywords:
            payload = client.search(keyword, limit=limit)
            samples.append((payload["query_millis"], payload["request_millis"]))
    return SweepStats(keyword_count=len(set(keywords)), samples=samples)


def combined_report(ingest_stats: IngestStats | None,
                    sweep_stats: SweepStats | None) -> BenchReport:
    report = BenchReport()
    if ingest_stats is not None:
        report.corpus_size = ingest_stats.corpus_size
        report.avg_detection_millis = ingest_stats.avg_detection_millis
        report.avg_upload_millis = ingest_stats.avg_upload_millis
        report.total_pipeline_millis = ingest_stats.total_pipeline_millis
    if sweep_stats is not None:
        report.avg_query_millis = sweep_stats.avg_query_millis
        report.avg_request_millis = sweep_stats.avg_request_millis
        report.keyword_count = sweep_stats.keyword_count
    return report


def _mean(values: list[float]) -> float:
    return sum(values) / len(values) if values else 0.0
