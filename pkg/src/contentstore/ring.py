"""Placement ring: hash partitions mapped to replica devices.

An object's partition is the top ``part_power`` bits of the 128-bit hash
of its canonical path. Each partition is assigned ``replica_count``
distinct devices; when at least that many zones exist, the replicas land
in distinct zones. Assignment is a deterministic greedy that keeps every
device's share of partition-replica slots proportional to its weight, and
rebalancing reassigns as few slots as it can.
"""

import hashlib
import json
from dataclasses import dataclass, replace
from pathlib import Path

from .errors import InsufficientDevices
from .model import ObjectPath

MIN_PART_POWER = 1
MAX_PART_POWER = 20


@dataclass(frozen=True)
class Device:
    id: int
    zone: int
    node_address: str
    weight: float = 1.0

    def __post_init__(self):
        if self.weight <= 0:
            raise ValueError("device weight must be positive")


@dataclass(frozen=True)
class RingMap:
    part_power: int
    replica_count: int
    devices: tuple[Device, ...]
    assignment: tuple[tuple[int, ...], ...]
    degraded_zones: bool = False
    salt: str = ""

    @property
    def partition_count(self) -> int:
        return 2 ** self.part_power

    def device_by_id(self, dev_id: int) -> Device:
        return _device_map(self.devices)[dev_id]

    def validate(self) -> None:
        """Check structural invariants; raises ValueError on violation."""
        if len(self.assignment) != self.partition_count:
            raise ValueError("assignment length != partition count")
        devs = _device_map(self.devices)
        zones = {d.zone for d in self.devices}
        disperse = len(zones) >= self.replica_count
        for part, row in enumerate(self.assignment):
            if len(row) != self.replica_count:
                raise ValueError(f"partition {part} has {len(row)} replicas")
            if len(set(row)) != len(row):
                raise ValueError(f"partition {part} repeats a device")
            row_zones = [devs[i].zone for i in row]
            if disperse and len(set(row_zones)) != len(row_zones):
                raise ValueError(f"partition {part} repeats a zone")

    def to_dict(self) -> dict:
        return {
            "part_power": self.part_power,
            "replica_count": self.replica_count,
            "devices": [
                {"id": d.id, "zone": d.zone, "node_address": d.node_address, "weight": d.weight}
                for d in self.devices
            ],
            "assignment": [list(row) for row in self.assignment],
            "degraded_zones": self.degraded_zones,
            "salt": self.salt,
        }

    def save(self, path: Path | str) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2), encoding="utf-8")

    @classmethod
    def from_dict(cls, d: dict) -> "RingMap":
        return cls(
            part_power=d["part_power"],
            replica_count=d["replica_count"],
            devices=tuple(
                Device(e["id"], e["zone"], e["node_address"], e.get("weight", 1.0))
                for e in d["devices"]
            ),
            assignment=tuple(tuple(row) for row in d["assignment"]),
            degraded_zones=d.get("degraded_zones", False),
            salt=d.get("salt", ""),
        )

    @classmethod
    def load(cls, path: Path | str) -> "RingMap":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _device_map(devices: tuple[Device, ...]) -> dict[int, Device]:
    return {d.id: d for d in devices}


def path_partition(path: ObjectPath, part_power: int, salt: str = "") -> int:
    """Top ``part_power`` bits of the 128-bit digest of the canonical path."""
    digest = hashlib.md5((salt + path.render()).encode("utf-8")).digest()
    return int.from_bytes(digest, "big") >> (128 - part_power)


def locate(ring: RingMap, path: ObjectPath) -> tuple[int, list[Device]]:
    """Partition and replica devices for an object path. Pure function."""
    part = path_partition(path, ring.part_power, ring.salt)
    devs = _device_map(ring.devices)
    return part, [devs[i] for i in ring.assignment[part]]


def _check_inputs(devices: list[Device], part_power: int, replica_count: int,
                  allow_degraded: bool) -> int:
    """Validate build inputs; returns the effective replica count."""
    if not MIN_PART_POWER <= part_power <= MAX_PART_POWER:
        raise ValueError(f"part_power must be in [{MIN_PART_POWER}, {MAX_PART_POWER}]")
    if replica_count < 1:
        raise ValueError("replica_count must be >= 1")
    if not devices:
        raise InsufficientDevices("no devices")
    ids = [d.id for d in devices]
    if len(set(ids)) != len(ids):
        raise ValueError("device ids must be unique")
    if len(devices) < replica_count:
        if not allow_degraded:
            raise InsufficientDevices(
                f"{len(devices)} devices < {replica_count} replicas"
            )
        return len(devices)
    return replica_count


def _tie_rank(dev_id: int, seed: int) -> tuple:
    if seed == 0:
        return (dev_id,)
    mixed = hashlib.md5(f"{seed}:{dev_id}".encode()).hexdigest()
    return (mixed, dev_id)


def build_ring(
    devices: list[Device],
    part_power: int,
    replica_count: int = 3,
    allow_degraded: bool = False,
    seed: int = 0,
    salt: str = "",
) -> RingMap:
    """Assign every partition its replica devices.

    Greedy, deterministic for fixed inputs and seed: each slot goes to the
    least-loaded-for-its-weight candidate, choosing distinct zones per
    partition whenever enough zones exist. With fewer zones than replicas
    the map falls back to distinct devices only and carries a warning flag.
    """
    effective_r = _check_inputs(devices, part_power, replica_count, allow_degraded)
    devs = sorted(devices, key=lambda d: d.id)
    zones = sorted({d.zone for d in devs})
    disperse = len(zones) >= effective_r

    n_parts = 2 ** part_power
    load: dict[int, int] = {d.id: 0 for d in devs}
    zone_load: dict[int, int] = {z: 0 for z in zones}
    zone_weight: dict[int, float] = {z: 0.0 for z in zones}
    by_zone: dict[int, list[Device]] = {z: [] for z in zones}
    for d in devs:
        zone_weight[d.zone] += d.weight
        by_zone[d.zone].append(d)

    assignment: list[tuple[int, ...]] = []
    for _part in range(n_parts):
        row: list[int] = []
        if disperse:
            picked_zones = sorted(
                zones, key=lambda z: (zone_load[z] / zone_weight[z], z)
            )[:effective_r]
            for z in picked_zones:
                dev = min(
                    by_zone[z],
                    key=lambda d: (load[d.id] / d.weight, _tie_rank(d.id, seed)),
                )
                row.append(dev.id)
                load[dev.id] += 1
                zone_load[z] += 1
        else:
            taken: set[int] = set()
            for _slot in range(effective_r):
                dev = min(
                    (d for d in devs if d.id not in taken),
                    key=lambda d: (load[d.id] / d.weight, _tie_rank(d.id, seed)),
                )
                row.append(dev.id)
                taken.add(dev.id)
                load[dev.id] += 1
        assignment.append(tuple(row))

    return RingMap(
        part_power=part_power,
        replica_count=effective_r,
        devices=tuple(devs),
        assignment=tuple(assignment),
        degraded_zones=not disperse,
        salt=salt,
    )


def rebalance(
    ring: RingMap,
    devices: list[Device],
    allow_degraded: bool = False,
    seed: int = 0,
) -> RingMap:
    """Re-assign for a changed device set, moving as few slots as possible.

    Existing assignments are kept wherever the device survives, the row
    constraints still hold, and the device is not over its new
    weight-proportional capacity; only the remaining vacancies are
    refilled. An unchanged device list is a fixpoint.
    """
    effective_r = _check_inputs(devices, ring.part_power, ring.replica_count, allow_degraded)
    if set(devices) == set(ring.devices) and effective_r == ring.replica_count:
        return replace(ring, devices=tuple(sorted(devices, key=lambda d: d.id)))

    devs = sorted(devices, key=lambda d: d.id)
    dev_map = _device_map(tuple(devs))
    zones = sorted({d.zone for d in devs})
    disperse = len(zones) >= effective_r
    n_parts = ring.partition_count
    total_slots = n_parts * effective_r
    total_weight = sum(d.weight for d in devs)

    capacity = {
        d.id: int(-(-total_slots * d.weight // total_weight))  # ceil
        for d in devs
    }
    load: dict[int, int] = {d.id: 0 for d in devs}

    # keep whatever still fits the new device set and row constraints
    kept: list[list[int | None]] = []
    for part in range(n_parts):
        old_row = ring.assignment[part] if part < len(ring.assignment) else ()
        row: list[int | None] = []
        row_zones: set[int] = set()
        for dev_id in old_row:
            if len(row) >= effective_r:
                break
            dev = dev_map.get(dev_id)
            if dev is None or dev_id in row or (disperse and dev.zone in row_zones):
                row.append(None)
                continue
            row.append(dev_id)
            row_zones.add(dev.zone)
            load[dev_id] += 1
        while len(row) < effective_r:
            row.append(None)
        kept.append(row)

    for part in range(n_parts):
        row = kept[part]
        row_ids = {i for i in row if i is not None}
        row_zones = {dev_map[i].zone for i in row_ids}
        for slot in range(effective_r):
            if row[slot] is not None:
                continue
            dev = _pick_fill(devs, dev_map, load, capacity, row_ids, row_zones,
                             disperse, seed)
            row[slot] = dev.id
            row_ids.add(dev.id)
            row_zones.add(dev.zone)
            load[dev.id] += 1

    _balance_sweep(kept, dev_map, load, capacity, disperse, seed)

    assignment = tuple(tuple(i for i in row if i is not None) for row in kept)
    out = RingMap(
        part_power=ring.part_power,
        replica_count=effective_r,
        devices=tuple(devs),
        assignment=assignment,
        degraded_zones=not disperse,
        salt=ring.salt,
    )
    out.validate()
    return out


def _balance_sweep(kept, dev_map, load, capacity, disperse, seed):
    """In-place replacement of over-capacity members by under-capacity ones.

    Each replacement moves exactly one slot, so total movement stays at the
    sum of the devices' capacity excesses. Sweeps repeat until a full pass
    makes no progress (two passes in practice).
    """
    for _sweep in range(len(dev_map) + 1):
        changed = False
        for row in kept:
            row_ids = set(row)
            row_zones = {dev_map[i].zone for i in row}
            for slot, dev_id in enumerate(row):
                if load[dev_id] <= capacity[dev_id]:
                    continue
                evictee = dev_map[dev_id]
                zones_left = row_zones - {evictee.zone}
                pool = [
                    d for d in dev_map.values()
                    if d.id not in row_ids
                    and load[d.id] < capacity[d.id]
                    and not (disperse and d.zone in zones_left)
                ]
                if not pool:
                    continue
                incoming = min(
                    pool, key=lambda d: (load[d.id] / d.weight, _tie_rank(d.id, seed))
                )
                row[slot] = incoming.id
                row_ids.discard(dev_id)
                row_ids.add(incoming.id)
                row_zones = {dev_map[i].zone for i in row}
                load[dev_id] -= 1
                load[incoming.id] += 1
                changed = True
        if not changed:
            break


def _pick_fill(devs, dev_map, load, capacity, row_ids, row_zones, disperse, seed):
    def eligible(zone_free: bool, capped: bool):
        for d in devs:
            if d.id in row_ids:
                continue
            if zone_free and d.zone in row_zones:
                continue
            if capped and load[d.id] >= capacity[d.id]:
                continue
            yield d

    for zone_free, capped in ((disperse, True), (disperse, False), (False, False)):
        pool = list(eligible(zone_free, capped))
        if pool:
            return min(pool, key=lambda d: (load[d.id] / d.weight, _tie_rank(d.id, seed)))
    raise InsufficientDevices("no device available for replica slot")
