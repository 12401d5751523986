"""Moving objects bound to live vertices, indexed per subgraph.

An object travels toward its *live vertex* and carries the remaining cost to
reach it; its distance from any vertex v is ``SD(v, live) + remaining``.
Object placement changes only between query batches, so stores are read-only
while queries run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GraphFormatError, ObjectError
from .graph import GraphSnapshot
from .partition import PartitionMap


@dataclass
class MovingObject:
    id: int
    live_vertex: int
    remaining: float


class ObjectStore:
    """Per-subgraph live-vertex index plus a global object-id index."""

    def __init__(self, snapshot: GraphSnapshot, partition: PartitionMap):
        self._n = snapshot.num_vertices
        self._partition = partition
        self.by_subgraph: dict[int, dict[int, list[MovingObject]]] = {
            sg: {} for sg in range(partition.m)
        }
        self._index: dict[int, MovingObject] = {}

    def __len__(self) -> int:
        return len(self._index)

    def add(self, obj: MovingObject) -> None:
        if obj.id in self._index:
            raise ObjectError(f"duplicate object id {obj.id}")
        if not (0 <= obj.live_vertex < self._n):
            raise ObjectError(f"live vertex {obj.live_vertex} does not exist")
        if obj.remaining < 0:
            raise ObjectError(f"negative remaining cost for object {obj.id}")
        sg = int(self._partition.assignment[obj.live_vertex])
        self.by_subgraph[sg].setdefault(obj.live_vertex, []).append(obj)
        self._index[obj.id] = obj

    def locate(self, oid: int) -> tuple[int, int]:
        """(subgraph, live vertex) of an object."""
        obj = self._index.get(oid)
        if obj is None:
            raise ObjectError(f"unknown object id {oid}")
        return int(self._partition.assignment[obj.live_vertex]), obj.live_vertex

    def get(self, oid: int) -> MovingObject:
        obj = self._index.get(oid)
        if obj is None:
            raise ObjectError(f"unknown object id {oid}")
        return obj

    def move(self, oid: int, new_vertex: int, new_remaining: float) -> None:
        """Rebind an object to a new live vertex, migrating subgraph maps."""
        obj = self.get(oid)
        if not (0 <= new_vertex < self._n):
            raise ObjectError(f"live vertex {new_vertex} does not exist")
        if new_remaining < 0:
            raise ObjectError(f"negative remaining cost for object {oid}")
        old_sg = int(self._partition.assignment[obj.live_vertex])
        bucket = self.by_subgraph[old_sg][obj.live_vertex]
        bucket.remove(obj)
        if not bucket:
            del self.by_subgraph[old_sg][obj.live_vertex]
        obj.live_vertex = new_vertex
        obj.remaining = new_remaining
        new_sg = int(self._partition.assignment[new_vertex])
        self.by_subgraph[new_sg].setdefault(new_vertex, []).append(obj)

    def all_objects(self) -> list[MovingObject]:
        return sorted(self._index.values(), key=lambda o: o.id)

    def check_consistency(self) -> None:
        """Rebuild the per-subgraph maps from the index and compare (test aid)."""
        seen = 0
        for sg, per_vertex in self.by_subgraph.items():
            for vertex, objs in per_vertex.items():
                for obj in objs:
                    assert self._index[obj.id] is obj
                    assert obj.live_vertex == vertex
                    assert int(self._partition.assignment[vertex]) == sg
                    seen += 1
        assert seen == len(self._index), "subgraph maps out of sync with index"


def generate_objects(
    snapshot: GraphSnapshot,
    partition: PartitionMap,
    mu: int,
    seed: int = 0,
) -> ObjectStore:
    """Place ``mu`` objects at uniformly random live vertices.

    Remaining costs are uniform in [0, median edge weight]; deterministic for
    a given seed.
    """
    if mu < 1:
        raise ObjectError(f"object count must be >= 1, got {mu}")
    rng = np.random.default_rng(seed)
    vertices = rng.integers(0, snapshot.num_vertices, size=mu)
    cap = float(np.median(snapshot.weights)) if snapshot.num_edges else 0.0
    remaining = rng.uniform(0.0, cap, size=mu) if cap > 0 else np.zeros(mu)
    store = ObjectStore(snapshot, partition)
    for oid in range(mu):
        store.add(MovingObject(oid, int(vertices[oid]), float(remaining[oid])))
    return store


def object_distance(sd_to_live: float, obj: MovingObject) -> float:
    """Distance to an object given the distance to its live vertex."""
    return sd_to_live + obj.remaining


# ---------------------------------------------------------------------------
# Object files: "id vertex remaining" per line. Move streams use the same
# format with '#'-prefixed separator lines between batches.

def read_objects(path: str, snapshot: GraphSnapshot, partition: PartitionMap) -> ObjectStore:
    store = ObjectStore(snapshot, partition)
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise GraphFormatError(path, line_no, f"expected 'id vertex remaining', got {line!r}")
            try:
                store.add(MovingObject(int(parts[0]), int(parts[1]), float(parts[2])))
            except ValueError as exc:
                raise GraphFormatError(path, line_no, str(exc)) from exc
    return store


def write_objects(path: str, store: ObjectStore) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for obj in store.all_objects():
            fh.write(f"{obj.id} {obj.live_vertex} {obj.remaining!r}\n")


def read_move_stream(path: str) -> list[list[tuple[int, int, float]]]:
    batches: list[list[tuple[int, int, float]]] = [[]]
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if batches[-1]:
                    batches.append([])
                continue
            parts = line.split()
            if len(parts) != 3:
                raise GraphFormatError(path, line_no, f"expected 'id vertex remaining', got {line!r}")
            batches[-1].append((int(parts[0]), int(parts[1]), float(parts[2])))
    if batches and not batches[-1]:
        batches.pop()
    return batches
