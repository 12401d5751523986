"""Canonical 6-vertex demo network used by tests, demos, and docs.

Vertices v1..v6 (ids 0..5) sit almost on a line; two subgraphs split at the
x-median; two objects move toward v2 and v5. Every golden number in the test
suite derives from hand-run or oracle Dijkstra on this fixture.

    v1(0,0) --2-- v2(2,0) --2-- v3(4,0) --1-- v4(5,0) --2-- v5(7,0) --2-- v6(8,1)
      \________________________ 10 _________________________________/

Subgraph A = {v1, v2, v3}, subgraph B = {v4, v5, v6}.
Object 2 heads to v2 with 0.5 left; object 1 heads to v5 with 1.0 left.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .graph import GraphSnapshot, build_snapshot
from .objects import MovingObject, ObjectStore
from .partition import PartitionMap, Topology, derive_topology

V1, V2, V3, V4, V5, V6 = range(6)
O1, O2 = 1, 2
SG_A, SG_B = 0, 1

_COORDS = [(0, 0), (2, 0), (4, 0), (5, 0), (7, 0), (8, 1)]
_EDGES = [
    (V1, V2, 2.0),
    (V2, V3, 2.0),
    (V3, V4, 1.0),
    (V4, V5, 2.0),
    (V5, V6, 2.0),
    (V1, V6, 10.0),
]
_OBJECTS = [(O2, V2, 0.5), (O1, V5, 1.0)]


def demo_snapshot() -> GraphSnapshot:
    eu = np.array([e[0] for e in _EDGES], dtype=np.int32)
    ev = np.array([e[1] for e in _EDGES], dtype=np.int32)
    w = np.array([e[2] for e in _EDGES])
    return build_snapshot(np.array(_COORDS, dtype=np.float64), eu, ev, w)


def demo_partition() -> PartitionMap:
    return PartitionMap(assignment=np.array([0, 0, 0, 1, 1, 1], dtype=np.int32), m=2)


def demo_store(snapshot: GraphSnapshot, partition: PartitionMap) -> ObjectStore:
    store = ObjectStore(snapshot, partition)
    for oid, vertex, remaining in _OBJECTS:
        store.add(MovingObject(oid, vertex, remaining))
    return store


@dataclass
class DemoNetwork:
    snapshot: GraphSnapshot
    partition: PartitionMap
    topology: Topology
    store: ObjectStore


def demo_network() -> DemoNetwork:
    snapshot = demo_snapshot()
    partition = demo_partition()
    topology = derive_topology(snapshot, partition)
    store = demo_store(snapshot, partition)
    return DemoNetwork(snapshot, partition, topology, store)


def write_demo_dimacs(directory: str) -> tuple[str, str]:
    """Write the fixture as DIMACS .gr/.co files; returns their paths."""
    gr = os.path.join(directory, "demo.gr")
    co = os.path.join(directory, "demo.co")
    with open(gr, "w", encoding="utf-8") as fh:
        fh.write("c six-vertex demo network\n")
        fh.write(f"p sp 6 {2 * len(_EDGES)}\n")
        for u, v, w in _EDGES:
            wtxt = f"{w:g}"
            fh.write(f"a {u + 1} {v + 1} {wtxt}\n")
            fh.write(f"a {v + 1} {u + 1} {wtxt}\n")
    with open(co, "w", encoding="utf-8") as fh:
        fh.write("p aux sp co 6\n")
        for i, (x, y) in enumerate(_COORDS):
            fh.write(f"v {i + 1} {x} {y}\n")
    return gr, co


def write_demo_objects(path: str) -> str:
    with open(path, "w", encoding="utf-8") as fh:
        for oid, vertex, remaining in _OBJECTS:
            fh.write(f"{oid} {vertex} {remaining}\n")
    return path
