import json

import pytest

from contentstore.gateway import GatewayCore
from contentstore.gatewayserver import GatewayServer
from contentstore.keywords import ReferenceEmbedder
from contentstore.nodeserver import NodeServer
from contentstore.ring import Device, build_ring
from contentstore.storage import HttpNode, LocalNode, StorageCluster

JPEG_BYTES = b"\xff\xd8\xff\xe0" + b"fake jpeg body"

USERS = [
    {"user": "tester", "key": "secret", "account": "AUTH_test"},
    {"user": "other", "key": "secret2", "account": "AUTH_other"},
]


def sidecar_json(*labels: str, confidence: float = 0.9) -> bytes:
    detections = [
        {
            "label": label,
            "confidence": confidence,
            "bbox": [1, 2, 30, 40],
            "class_id": i,
        }
        for i, label in enumerate(labels)
    ]
    return json.dumps({"detections": detections}).encode()


def local_cluster(tmp_path, n_devices=3, n_zones=3, part_power=4, replicas=3):
    """Ring + cluster over in-process disk nodes; returns (ring, cluster, nodes)."""
    devices = [
        Device(i, i % n_zones, f"local-{i}", 1.0) for i in range(n_devices)
    ]
    ring = build_ring(devices, part_power, replicas)
    nodes = {
        d.node_address: LocalNode(tmp_path / f"dev{d.id}", part_power, d.node_address)
        for d in devices
    }
    return ring, StorageCluster(ring, nodes), nodes


class GatewayStack:
    """Node servers + gateway server wired over real HTTP."""

    def __init__(self, tmp_path, n_devices=3, n_zones=3, part_power=4,
                 replicas=3, detector=None, embedder=None, engine=None,
                 users=USERS, keyphrase_k=3):
        from contentstore.search import SearchEngine

        self.node_servers = []
        devices = []
        for i in range(n_devices):
            server = NodeServer(tmp_path / f"dev{i}", part_power=part_power)
            server.start()
            self.node_servers.append(server)
            devices.append(Device(i, i % n_zones, server.address, 1.0))
        self.ring = build_ring(devices, part_power, replicas)
        self.cluster = StorageCluster(
            self.ring, {d.node_address: HttpNode(d.node_address) for d in devices}
        )
        self.engine = engine if engine is not None else SearchEngine()
        self.core = GatewayCore(
            self.cluster,
            self.engine,
            users,
            detector=detector,
            embedder=embedder or ReferenceEmbedder(),
            keyphrase_k=keyphrase_k,
        )
        self.server = GatewayServer(self.core)
        self.server.start()
        self.url = f"http://{self.server.address}"

    def client(self, user="tester", key="secret"):
        from contentstore.client import GatewayClient

        client = GatewayClient(self.url)
        client.auth(user, key)
        return client

    def stop(self):
        self.server.stop()
        for node in self.node_servers:
            node.stop()


@pytest.fixture
def gateway_stack(tmp_path):
    stacks = []

    def build(**kwargs):
        stack = GatewayStack(tmp_path, **kwargs)
        stacks.append(stack)
        return stack

    yield build
    for stack in stacks:
        stack.stop()
