"""Operator CLI: serve nodes and gateway, manage rings, ingest, query, bench."""

import json
import sys
from pathlib import Path

import click

from .bench import (
    CLASS_NAMES,
    CSV_HEADER,
    combined_report,
    generate_corpus,
    ingest as run_ingest,
    query_sweep,
)
from .client import GatewayClient
from .detect import HttpDetector
from .gateway import GatewayCore, load_users
from .gatewayserver import GatewayServer
from .keywords import DEFAULT_DIMENSION, HttpEmbedder, ReferenceEmbedder
from .model import ObjectPath
from .nodeserver import NodeServer
from .ring import Device, RingMap, build_ring, rebalance as ring_rebalance
from .search import SearchEngine
from .storage import HttpNode, StorageCluster


@click.group()
def main():
    """Content-aware object store: search what your objects contain."""


# --- servers ---

@main.command("serve-node")
@click.option("--root", required=True, type=click.Path(file_okay=False))
@click.option("--listen", default="127.0.0.1:6001", show_default=True)
@click.option("--part-power", default=8, show_default=True)
def serve_node(root, listen, part_power):
    """Run one storage node."""
    host, port = _host_port(listen)
    server = NodeServer(root, host, port, part_power)
    click.echo(f"node serving {root} on {server.address}")
    server.serve_forever()


@main.command("serve-gateway")
@click.option("--ring", "ring_file", required=True, type=click.Path(exists=True))
@click.option("--listen", default="127.0.0.1:8080", show_default=True)
@click.option("--users", "users_file", required=True, type=click.Path(exists=True))
@click.option("--detector", default="sidecar", show_default=True,
              help="'sidecar' or the base URL of a detection service")
@click.option("--embedder", default="reference", show_default=True,
              help="'reference' or the base URL of an embedding service")
@click.option("--embedder-dim", default=DEFAULT_DIMENSION, show_default=True)
@click.option("--nodes", default="", help="device address overrides, id=host:port[,id=host:port...]")
@click.option("--snapshot", type=click.Path(), default=None,
              help="index snapshot file (JSON lines), replayed on start")
@click.option("--keyphrase-k", default=3, show_default=True)
def serve_gateway(ring_file, listen, users_file, detector, embedder,
                  embedder_dim, nodes, snapshot, keyphrase_k):
    """Run the gateway over an existing ring."""
    ring = RingMap.load(ring_file)
    ring = _apply_node_overrides(ring, nodes)
    cluster = StorageCluster(ring, {
        d.node_address: HttpNode(d.node_address) for d in ring.devices
    })
    engine = SearchEngine(snapshot_path=snapshot)
    det = None if detector == "sidecar" else HttpDetector(detector)
    emb = (
        ReferenceEmbedder(embedder_dim)
        if embedder == "reference"
        else HttpEmbedder(embedder, embedder_dim)
    )
    core = GatewayCore(
        cluster, engine, load_users(users_file),
        detector=det, embedder=emb, keyphrase_k=keyphrase_k,
    )
    host, port = _host_port(listen)
    server = GatewayServer(core, host, port)
    click.echo(f"gateway on {server.address} ({len(ring.devices)} devices, "
               f"{engine.doc_count()} docs indexed)")
    server.serve_forever()


# --- ring management ---

@main.group("ring")
def ring_group():
    """Build or rebalance placement rings."""


def _parse_device(spec: str) -> Device:
    parts = spec.split(":")
    if len(parts) not in (4, 5):
        raise click.BadParameter(
            f"device must be ID:ZONE:HOST:PORT[:WEIGHT], got {spec!r}"
        )
    dev_id, zone, host, port = int(parts[0]), int(parts[1]), parts[2], parts[3]
    weight = float(parts[4]) if len(parts) == 5 else 1.0
    return Device(dev_id, zone, f"{host}:{port}", weight)


@ring_group.command("build")
@click.option("--device", "devices", multiple=True, required=True,
              help="ID:ZONE:HOST:PORT[:WEIGHT], repeatable")
@click.option("--part-power", default=8, show_default=True)
@click.option("--replicas", default=3, show_default=True)
@click.option("--allow-degraded", is_flag=True)
@click.option("--out", required=True, type=click.Path())
def ring_build(devices, part_power, replicas, allow_degraded, out):
    ring = build_ring([_parse_device(d) for d in devices], part_power,
                      replicas, allow_degraded=allow_degraded)
    ring.save(out)
    click.echo(f"ring: {ring.partition_count} partitions x {ring.replica_count} "
               f"replicas over {len(ring.devices)} devices -> {out}")
    if ring.degraded_zones:
        click.echo("warning: fewer zones than replicas; dispersion is by device only")


@ring_group.command("rebalance")
@click.option("--ring", "ring_file", required=True, type=click.Path(exists=True))
@click.option("--device", "devices", multiple=True, required=True,
              help="the new full device list, same format as build")
@click.option("--allow-degraded", is_flag=True)
@click.option("--out", required=True, type=click.Path())
def ring_rebalance_cmd(ring_file, devices, allow_degraded, out):
    old = RingMap.load(ring_file)
    new = ring_rebalance(old, [_parse_device(d) for d in devices],
                         allow_degraded=allow_degraded)
    moved = sum(
        len(set(o) - set(n)) for o, n in zip(old.assignment, new.assignment)
    )
    new.save(out)
    click.echo(f"rebalanced: {moved} replica slots moved -> {out}")


# --- data plane ---

@main.command("ingest")
@click.argument("directory", type=click.Path(exists=True, file_okay=False))
@click.option("--gateway", required=True)
@click.option("--user", required=True)
@click.option("--key", required=True)
@click.option("--container", default="ingest", show_default=True)
@click.option("--concurrency", default=4, show_default=True)
def ingest_cmd(directory, gateway, user, key, container, concurrency):
    """Upload every file in DIRECTORY (sidecars ride along automatically)."""
    client = GatewayClient(gateway)
    auth = client.auth(user, key)
    stats = run_ingest(directory, client, auth["account"], container,
                       concurrency, log=click.echo)
    click.echo(
        f"ingested {stats.uploaded}/{stats.corpus_size} "
        f"(failed={stats.failed}, stored-not-extracted={stats.stored_not_extracted}) "
        f"avg_detection={stats.avg_detection_millis:.1f}ms "
        f"avg_upload={stats.avg_upload_millis:.1f}ms "
        f"wall={stats.total_pipeline_millis:.0f}ms"
    )
    if stats.corpus_size == 0 or stats.failure_rate > 0.01:
        sys.exit(1)


@main.command("search")
@click.argument("query")
@click.option("--gateway", required=True)
@click.option("--user", required=True)
@click.option("--key", required=True)
@click.option("--mode", default="AND", show_default=True)
@click.option("--limit", default=50, show_default=True)
@click.option("--type", "content_type", default=None)
@click.option("--container", default=None)
def search_cmd(query, gateway, user, key, mode, limit, content_type, container):
    client = GatewayClient(gateway)
    client.auth(user, key)
    payload = client.search(query, mode=mode, limit=limit,
                            content_type=content_type, container=container)
    for hit in payload["hits"]:
        doc = hit["doc"]
        click.echo(f"{hit['score']:>3}  {hit['url_path']}  [{doc['content_type']}] "
                   f"{', '.join(doc['contents'][:5])}")
    click.echo(f"query={payload['query_millis']:.2f}ms "
               f"request={payload['request_millis']:.2f}ms "
               f"hits={len(payload['hits'])}")


@main.command("suggest")
@click.argument("prefix")
@click.option("--gateway", required=True)
@click.option("--user", required=True)
@click.option("--key", required=True)
@click.option("-n", default=10, show_default=True)
def suggest_cmd(prefix, gateway, user, key, n):
    client = GatewayClient(gateway)
    client.auth(user, key)
    for term in client.suggest(prefix, n):
        click.echo(term)


@main.command("repair")
@click.argument("url_path")
@click.option("--ring", "ring_file", required=True, type=click.Path(exists=True))
def repair_cmd(url_path, ring_file):
    """Re-push a digest-valid copy of URL_PATH to lagging replicas."""
    ring = RingMap.load(ring_file)
    cluster = StorageCluster(ring, {
        d.node_address: HttpNode(d.node_address) for d in ring.devices
    })
    repaired = cluster.repair(ObjectPath.parse(url_path))
    click.echo(f"repaired {repaired} replica(s) of {url_path}")


# --- bench ---

@main.group("bench")
def bench_group():
    """Generate corpora and run the timing methodology."""


@bench_group.command("gen")
@click.option("--out", required=True, type=click.Path(file_okay=False))
@click.option("--images", required=True, type=int)
@click.option("--classes", default=80, show_default=True)
@click.option("--seed", default=1, show_default=True)
@click.option("--payload-bytes", default=2048, show_default=True)
def bench_gen(out, images, classes, seed, payload_bytes):
    written = generate_corpus(out, images, classes, seed, payload_bytes)
    click.echo(f"wrote {len(written)} images (+sidecars) to {out}")


@bench_group.command("run")
@click.option("--gateway", required=True)
@click.option("--user", required=True)
@click.option("--key", required=True)
@click.option("--corpus", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--container", default="bench", show_default=True)
@click.option("--concurrency", default=4, show_default=True)
@click.option("--repeats", default=5, show_default=True)
@click.option("--keywords", default=None,
              help="comma-separated sweep keywords; defaults to the 80 class names")
@click.option("--out", "out_file", type=click.Path(), default=None,
              help="write the CSV row here instead of stdout")
def bench_run(gateway, user, key, corpus, container, concurrency, repeats,
              keywords, out_file):
    """Ingest CORPUS, then sweep keywords; emit one CSV row."""
    client = GatewayClient(gateway)
    auth = client.auth(user, key)
    stats = run_ingest(corpus, client, auth["account"], container, concurrency,
                       log=lambda msg: click.echo(msg, err=True))
    sweep_keywords = (
        [w.strip() for w in keywords.split(",") if w.strip()]
        if keywords else list(CLASS_NAMES)
    )
    sweep = query_sweep(client, sweep_keywords, repeats)
    report = combined_report(stats, sweep)
    lines = f"{CSV_HEADER}\n{report.csv_row()}\n"
    if out_file:
        Path(out_file).write_text(lines, encoding="utf-8")
        click.echo(f"wrote {out_file}")
    else:
        click.echo(lines, nl=False)
    if stats.corpus_size == 0 or stats.failure_rate > 0.01:
        sys.exit(1)


def _host_port(listen: str) -> tuple[str, int]:
    host, _, port = listen.rpartition(":")
    return host or "127.0.0.1", int(port)


def _apply_node_overrides(ring: RingMap, overrides: str) -> RingMap:
    if not overrides:
        return ring
    mapping = {}
    for pair in overrides.split(","):
        dev_id, _, addr = pair.partition("=")
        mapping[int(dev_id)] = addr
    devices = tuple(
        Device(d.id, d.zone, mapping.get(d.id, d.node_address), d.weight)
        for d in ring.devices
    )
    return RingMap(
        part_power=ring.part_power,
        replica_count=ring.replica_count,
        devices=devices,
        assignment=ring.assignment,
        degraded_zones=ring.degraded_zones,
        salt=ring.salt,
    )


if __name__ == "__main__":
    main()
