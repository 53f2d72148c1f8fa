"""Storage nodes and the replication writer.

A node persists object bytes plus a descriptor under
``{root}/{partition}/{path-hash}/`` (write-temp + rename, flushed before
ack). The cluster writer fans a put out to every replica device from the
ring and succeeds on majority ack; reads walk replicas in placement order
and digest-verify before returning, stepping over corrupt copies.
"""

import errno
import hashlib
import json
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol
from urllib.parse import quote

import requests

from .errors import CorruptReplica, DiskFull, NotFound, QuorumFailed
from .model import (
    ContentType,
    DocumentFormat,
    ImageFormat,
    Kind,
    ObjectDescriptor,
    ObjectPath,
    content_hash,
)
from .ring import RingMap, locate, path_partition

DEFAULT_PART_POWER = 8


@dataclass(frozen=True)
class StoredObject:
    descriptor: ObjectDescriptor
    data: bytes


@dataclass(frozen=True)
class WriteReceipt:
    acks: int
    replicas_attempted: int
    failed_nodes: tuple[str, ...]

    def __post_init__(self):
        if self.acks + len(self.failed_nodes) != self.replicas_attempted:
            raise ValueError("acks + failures must equal attempts")


class NodeLike(Protocol):
    address: str

    def put(self, path: ObjectPath, data: bytes, descriptor: ObjectDescriptor) -> None: ...
    def get(self, path: ObjectPath) -> StoredObject: ...
    def head(self, path: ObjectPath) -> ObjectDescriptor: ...
    def delete(self, path: ObjectPath) -> bool: ...


class LocalNode:
    """Disk-backed node; per-path operations are mutually exclusive."""

    def __init__(self, root: Path | str, part_power: int = DEFAULT_PART_POWER,
                 address: str = "local"):
        self.root = Path(root)
        self.part_power = part_power
        self.address = address
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _lock_for(self, path: ObjectPath) -> threading.Lock:
        key = path.render()
        with self._locks_guard:
            lock = self._locks.get(key)
            if lock is None:
                lock = self._locks[key] = threading.Lock()
            return lock

    def _object_dir(self, path: ObjectPath) -> Path:
        digest = hashlib.md5(path.render().encode("utf-8")).hexdigest()
        partition = path_partition(path, self.part_power)
        return self.root / str(partition) / digest

    def put(self, path: ObjectPath, data: bytes, descriptor: ObjectDescriptor) -> None:
        if descriptor.size_bytes != len(data) or descriptor.content_hash != content_hash(data):
            raise ValueError("descriptor does not match payload")
        with self._lock_for(path):
            obj_dir = self._object_dir(path)
            tmp_data = obj_dir / "data.tmp"
            tmp_meta = obj_dir / "meta.tmp"
            try:
                obj_dir.mkdir(parents=True, exist_ok=True)
                _write_flushed(tmp_data, data)
                _write_flushed(tmp_meta, _meta_bytes(descriptor))
                tmp_data.replace(obj_dir / "data")
                tmp_meta.replace(obj_dir / "meta.json")
            except OSError as exc:
                for tmp in (tmp_data, tmp_meta):
                    tmp.unlink(missing_ok=True)
                if exc.errno == errno.ENOSPC:
                    raise DiskFull(str(path)) from exc
                raise

    def get(self, path: ObjectPath) -> StoredObject:
        with self._lock_for(path):
            obj_dir = self._object_dir(path)
            try:
                meta = (obj_dir / "meta.json").read_bytes()
                data = (obj_dir / "data").read_bytes()
            except FileNotFoundError:
                raise NotFound(str(path)) from None
            return StoredObject(_meta_parse(meta), data)

    def head(self, path: ObjectPath) -> ObjectDescriptor:
        with self._lock_for(path):
            try:
                meta = (self._object_dir(path) / "meta.json").read_bytes()
            except FileNotFoundError:
                raise NotFound(str(path)) from None
            return _meta_parse(meta)

    def delete(self, path: ObjectPath) -> bool:
        with self._lock_for(path):
            obj_dir = self._object_dir(path)
            if not (obj_dir / "meta.json").exists() and not (obj_dir / "data").exists():
                return False
            for name in ("data", "meta.json", "data.tmp", "meta.tmp"):
                (obj_dir / name).unlink(missing_ok=True)
            try:
                obj_dir.rmdir()
            except OSError:
                pass
            return True


def _write_flushed(path: Path, data: bytes) -> None:
    with path.open("wb") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())


def _meta_bytes(descriptor: ObjectDescriptor) -> bytes:
    return json.dumps(descriptor.to_dict(), sort_keys=True).encode("utf-8")


def _meta_parse(raw: bytes) -> ObjectDescriptor:
    return ObjectDescriptor.from_dict(json.loads(raw))


class HttpNode:
    """Client for a node served over HTTP (see nodeserver)."""

    def __init__(self, address: str, timeout: float = 10.0):
        self.address = address
        self.timeout = timeout
        self._session = requests.Session()

    def _url(self, path: ObjectPath) -> str:
        return f"http://{self.address}/node{quote(path.render())}"

    def put(self, path: ObjectPath, data: bytes, descriptor: ObjectDescriptor) -> None:
        headers = {
            "X-Content-Hash": descriptor.content_hash,
            "X-Uploaded-At": str(descriptor.uploaded_at),
        }
        if descriptor.content_type is not None:
            headers["X-Content-Kind"] = descriptor.content_type.kind.value
            headers["X-Content-Format"] = descriptor.content_type.format.value
        resp = self._session.put(self._url(path), data=data, headers=headers,
                                 timeout=self.timeout)
        if resp.status_code == 507:
            raise DiskFull(str(path))
        if resp.status_code != 201:
            raise OSError(f"node {self.address} PUT failed: HTTP {resp.status_code}")

    def get(self, path: ObjectPath) -> StoredObject:
        resp = self._session.get(self._url(path), timeout=self.timeout)
        if resp.status_code == 404:
            raise NotFound(str(path))
        if resp.status_code != 200:
            raise OSError(f"node {self.address} GET failed: HTTP {resp.status_code}")
        return StoredObject(_descriptor_from_headers(path, resp.headers), resp.content)

    def head(self, path: ObjectPath) -> ObjectDescriptor:
        resp = self._session.head(self._url(path), timeout=self.timeout)
        if resp.status_code == 404:
            raise NotFound(str(path))
        if resp.status_code != 200:
            raise OSError(f"node {self.address} HEAD failed: HTTP {resp.status_code}")
        return _descriptor_from_headers(path, resp.headers)

    def delete(self, path: ObjectPath) -> bool:
        resp = self._session.delete(self._url(path), timeout=self.timeout)
        if resp.status_code == 404:
            return False
        if resp.status_code != 204:
            raise OSError(f"node {self.address} DELETE failed: HTTP {resp.status_code}")
        return True


def _descriptor_from_headers(path: ObjectPath, headers) -> ObjectDescriptor:
    ct = None
    kind = headers.get("X-Content-Kind")
    if kind:
        k = Kind(kind)
        fmt_cls = ImageFormat if k is Kind.IMAGE else DocumentFormat
        ct = ContentType(k, fmt_cls(headers["X-Content-Format"]))
    return ObjectDescriptor(
        path=path,
        size_bytes=int(headers["X-Object-Size"]),
        content_hash=headers["X-Content-Hash"],
        content_type=ct,
        uploaded_at=int(headers["X-Uploaded-At"]),
    )


class StorageCluster:
    """Replicated reads and writes against ring-placed nodes."""

    def __init__(self, ring: RingMap, nodes: dict[str, NodeLike]):
        self.ring = ring
        self.nodes = nodes

    def _replicas(self, path: ObjectPath) -> list[NodeLike]:
        _, devices = locate(self.ring, path)
        return [self.nodes[d.node_address] for d in devices]

    def put(self, path: ObjectPath, data: bytes,
            descriptor: ObjectDescriptor) -> WriteReceipt:
        """Write to every replica concurrently; majority ack or QuorumFailed.

        No rollback on failure: acked copies stay, and the receipt lists
        the nodes that failed either way.
        """
        replicas = self._replicas(path)
        failed: list[str] = []
        with ThreadPoolExecutor(max_workers=len(replicas)) as pool:
            futures = {
                pool.submit(node.put, path, data, descriptor): node for node in replicas
            }
            for future, node in futures.items():
                try:
                    future.result()
                except Exception:
                    failed.append(node.address)
        receipt = WriteReceipt(
            acks=len(replicas) - len(failed),
            replicas_attempted=len(replicas),
            failed_nodes=tuple(failed),
        )
        majority = len(replicas) // 2 + 1
        if receipt.acks < majority:
            raise QuorumFailed(
                f"{receipt.acks}/{len(replicas)} acks for {path}", receipt=receipt
            )
        return receipt

    def get(self, path: ObjectPath) -> StoredObject:
        """First digest-valid replica in placement order."""
        saw_corrupt = False
        for node in self._replicas(path):
            try:
                stored = node.get(path)
            except NotFound:
                continue
            except Exception:
                continue
            if content_hash(stored.data) != stored.descriptor.content_hash:
                saw_corrupt = True
                continue
            return stored
        if saw_corrupt:
            raise CorruptReplica(str(path))
        raise NotFound(str(path))

    def head(self, path: ObjectPath) -> ObjectDescriptor:
        for node in self._replicas(path):
            try:
                return node.head(path)
            except NotFound:
                continue
            except Exception:
                continue
        raise NotFound(str(path))

    def delete(self, path: ObjectPath) -> bool:
        removed_any = False
        for node in self._replicas(path):
            try:
                removed_any = node.delete(path) or removed_any
            except Exception:
                continue
        return removed_any

    def repair(self, path: ObjectPath) -> int:
        """Re-push a digest-valid copy to replicas missing or corrupting it."""
        good = self.get(path)
        repaired = 0
        for node in self._replicas(path):
            try:
                existing = node.get(path)
                if content_hash(existing.data) == good.descriptor.content_hash:
                    continue
            except Exception:
                pass
            try:
                node.put(path, good.data, good.descriptor)
                repaired += 1
            except Exception:
                continue
        return repaired
