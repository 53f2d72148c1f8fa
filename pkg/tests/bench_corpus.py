"""Synthetic IndexDocument corpora for engine-level tests."""

import random

from contentstore.bench import CLASS_NAMES
from contentstore.indexdoc import IndexDocument
from contentstore.model import iso_utc

CLASS_LABELS = list(CLASS_NAMES)


def build_index_corpus(n: int, seed: int = 1, account: str = "AUTH_test"):
    """N image-style index documents labeled from the 80 class names."""
    rng = random.Random(seed)
    docs = []
    for i in range(n):
        labels = rng.sample(CLASS_LABELS, k=rng.randint(1, 4))
        container = f"segment{rng.randint(1, 4)}"
        name = f"img_{i:06d}.jpg"
        docs.append(
            IndexDocument(
                object_name=name,
                account=account,
                container=container,
                url_path=f"/v1/{account}/{container}/{name}",
                content_type="image",
                contents=tuple(labels),
                size_bytes=rng.randint(128, 8192),
                uploaded_at=iso_utc(1_700_000_000 + rng.randint(0, 5000)),
                confidences=tuple(
                    (label, round(rng.uniform(0.3, 1.0), 4)) for label in labels
                ),
            )
        )
    return docs
