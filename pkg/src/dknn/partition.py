"""Graph partitioning and per-subgraph topology derivation.

Partitions come from a built-in recursive coordinate bisection (no external
dependencies) or from a METIS-style file. The derived topology records, per
subgraph: internal vertices, border vertices (vertices with at least one
neighbor in another subgraph), external edge records, a subgraph-local CSR
used by the search workers, and connected-component labels used by work
counters.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import PartitionError
from .graph import GraphSnapshot


@dataclass(frozen=True)
class PartitionMap:
    assignment: np.ndarray  # (n,) int32 vertex -> subgraph id
    m: int

    def __post_init__(self):
        counts = np.bincount(self.assignment, minlength=self.m)
        if len(counts) > self.m:
            raise PartitionError(f"assignment uses ids >= m={self.m}")
        empty = np.where(counts == 0)[0]
        if len(empty):
            raise PartitionError(f"empty subgraphs: {empty.tolist()}")

    def part_sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.m)


def partition_rcb(snapshot: GraphSnapshot, m: int, seed: int = 0) -> PartitionMap:
    """Recursive coordinate bisection on vertex coordinates.

    Each split divides along the wider coordinate axis at the median, stable
    ties broken by (coordinate, vertex id), parts balanced within one vertex.
    Fully deterministic; ``seed`` is accepted for interface stability but has
    no effect. Parts are not guaranteed to be connected.
    """
    n = snapshot.num_vertices
    if m < 1:
        raise PartitionError(f"m must be >= 1, got {m}")
    if m > n:
        raise PartitionError(f"m={m} exceeds vertex count {n}")
    assignment = np.zeros(n, dtype=np.int32)
    coords = snapshot.coords

    def split(ids: np.ndarray, parts: int, first_part: int) -> None:
        if parts == 1:
            assignment[ids] = first_part
            return
        xs, ys = coords[ids, 0], coords[ids, 1]
        axis = 0 if (xs.max() - xs.min()) >= (ys.max() - ys.min()) else 1
        order = np.lexsort((ids, coords[ids, axis]))
        ids = ids[order]
        left_parts = (parts + 1) // 2
        right_parts = parts - left_parts
        cut = int(round(len(ids) * left_parts / parts))
        cut = max(left_parts, min(len(ids) - right_parts, cut))
        split(ids[:cut], left_parts, first_part)
        split(ids[cut:], right_parts, first_part + left_parts)

    split(np.arange(n, dtype=np.int64), m, 0)
    return PartitionMap(assignment=assignment, m=m)


def import_partition(path: str, snapshot: GraphSnapshot) -> PartitionMap:
    """Read a METIS-style partition file: line i holds the subgraph of vertex i."""
    ids: list[int] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                ids.append(int(line.split()[0]))
            except ValueError as exc:
                raise PartitionError(f"{path}:{line_no}: not an integer: {line!r}") from exc
    n = snapshot.num_vertices
    if len(ids) != n:
        raise PartitionError(f"{path}: expected {n} lines (one per vertex), got {len(ids)}")
    arr = np.array(ids, dtype=np.int32)
    if arr.min() < 0:
        raise PartitionError(f"{path}: negative subgraph id")
    m = int(arr.max()) + 1
    return PartitionMap(assignment=arr, m=m)


def export_partition(path: str, partition: PartitionMap) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(str(p) for p in partition.assignment.tolist()))
        fh.write("\n")


@dataclass
class SubgraphTopology:
    sg_id: int
    vertices: np.ndarray          # global ids, ascending
    border_vertices: np.ndarray   # global ids, ascending
    border_coords: np.ndarray     # (b, 2)
    neighbor_sgs: tuple[int, ...]
    internal_edge_count: int
    # subgraph-local CSR over internal edges (local vertex ids 0..k-1 follow
    # the ascending global order of `vertices`)
    indptr: np.ndarray
    adj_local: np.ndarray         # local neighbor per half-edge
    adj_eid: np.ndarray           # global edge id per half-edge
    # external edge records, one per (edge, incident side)
    ext_local: np.ndarray         # local id of our border endpoint
    ext_remote_vertex: np.ndarray  # global id of the far endpoint
    ext_remote_sg: np.ndarray
    ext_eid: np.ndarray           # global edge id (weight lookup per snapshot)
    ext_primary: np.ndarray       # True on the side with the smaller sg id
    # connected components of the internal structure
    component: np.ndarray         # (k,) label per local vertex
    component_size: np.ndarray

    @property
    def n_local(self) -> int:
        return len(self.vertices)

    def external_edges(self, snapshot: GraphSnapshot):
        """Iterate (border vertex, remote vertex, remote sg, weight)."""
        for i in range(len(self.ext_eid)):
            yield (
                int(self.vertices[self.ext_local[i]]),
                int(self.ext_remote_vertex[i]),
                int(self.ext_remote_sg[i]),
                float(snapshot.weights[self.ext_eid[i]]),
            )


@dataclass
class Topology:
    partition: PartitionMap
    subgraphs: list[SubgraphTopology]
    local_id: np.ndarray                 # (n,) local index of each vertex
    border_index: dict[int, np.ndarray]  # sg -> border coords, the coordinator table

    @property
    def m(self) -> int:
        return self.partition.m

    def owner(self, vertex: int) -> int:
        return int(self.partition.assignment[vertex])


def _local_components(indptr: np.ndarray, adj: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    label = np.full(k, -1, dtype=np.int32)
    sizes: list[int] = []
    for start in range(k):
        if label[start] >= 0:
            continue
        comp = len(sizes)
        size = 0
        q = deque([start])
        label[start] = comp
        while q:
            v = q.popleft()
            size += 1
            for i in range(indptr[v], indptr[v + 1]):
                u = adj[i]
                if label[u] < 0:
                    label[u] = comp
                    q.append(u)
        sizes.append(size)
    return label, np.array(sizes, dtype=np.int64)


def derive_topology(snapshot: GraphSnapshot, partition: PartitionMap) -> Topology:
    """Pure derivation of per-subgraph structures from a snapshot + partition."""
    part = partition.assignment
    n, m = snapshot.num_vertices, partition.m
    eu, ev = snapshot.edge_u, snapshot.edge_v
    external = part[eu] != part[ev] if snapshot.num_edges else np.zeros(0, bool)

    local_id = np.zeros(n, dtype=np.int32)
    vertex_order = np.argsort(part, kind="stable")
    part_sizes = partition.part_sizes()
    starts = np.concatenate([[0], np.cumsum(part_sizes)])
    sg_vertices: list[np.ndarray] = []
    for sg in range(m):
        verts = np.sort(vertex_order[starts[sg]:starts[sg + 1]])
        sg_vertices.append(verts)
        local_id[verts] = np.arange(len(verts), dtype=np.int32)

    # group internal edges by subgraph
    int_ids = np.where(~external)[0]
    int_sg = part[eu[int_ids]]
    int_order = np.argsort(int_sg, kind="stable")
    int_ids = int_ids[int_order]
    int_bounds = np.searchsorted(int_sg[int_order], np.arange(m + 1))

    # group external edge sides by subgraph
    ext_ids = np.where(external)[0]
    side_eid = np.concatenate([ext_ids, ext_ids])
    side_near = np.concatenate([eu[ext_ids], ev[ext_ids]])
    side_far = np.concatenate([ev[ext_ids], eu[ext_ids]])
    side_sg = part[side_near]
    side_order = np.argsort(side_sg, kind="stable")
    side_eid, side_near, side_far = side_eid[side_order], side_near[side_order], side_far[side_order]
    side_bounds = np.searchsorted(side_sg[side_order], np.arange(m + 1))

    subgraphs: list[SubgraphTopology] = []
    border_index: dict[int, np.ndarray] = {}
    for sg in range(m):
        verts = sg_vertices[sg]
        k = len(verts)
        edges = int_ids[int_bounds[sg]:int_bounds[sg + 1]]
        lu = local_id[eu[edges]]
        lv = local_id[ev[edges]]
        half_src = np.concatenate([lu, lv])
        half_dst = np.concatenate([lv, lu])
        half_eid = np.concatenate([edges, edges]).astype(np.int32)
        order = np.argsort(half_src, kind="stable")
        indptr = np.zeros(k + 1, dtype=np.int64)
        np.add.at(indptr, half_src + 1, 1)
        indptr = np.cumsum(indptr)
        adj_local = half_dst[order].astype(np.int32)
        adj_eid = half_eid[order]

        lo, hi = side_bounds[sg], side_bounds[sg + 1]
        ext_near = side_near[lo:hi]
        ext_far = side_far[lo:hi]
        ext_eid = side_eid[lo:hi].astype(np.int32)
        ext_remote_sg = part[ext_far].astype(np.int32)
        borders = np.unique(ext_near)

        component, component_size = _local_components(indptr, adj_local, k)

        sub = SubgraphTopology(
            sg_id=sg,
            vertices=verts,
            border_vertices=borders,
            border_coords=snapshot.coords[borders] if len(borders) else np.zeros((0, 2)),
            neighbor_sgs=tuple(sorted(set(ext_remote_sg.tolist()))),
            internal_edge_count=len(edges),
            indptr=indptr,
            adj_local=adj_local,
            adj_eid=adj_eid,
            ext_local=local_id[ext_near].astype(np.int32),
            ext_remote_vertex=ext_far.astype(np.int32),
            ext_remote_sg=ext_remote_sg,
            ext_eid=ext_eid,
            ext_primary=(sg < ext_remote_sg),
            component=component,
            component_size=component_size,
        )
        subgraphs.append(sub)
        border_index[sg] = sub.border_coords

    return Topology(partition=partition, subgraphs=subgraphs,
                    local_id=local_id, border_index=border_index)


def topology_report(topology: Topology) -> str:
    """Human-readable per-subgraph summary (diagnostic output of `prepare`)."""
    lines = ["sg  vertices  borders  internal_edges  external_edges  neighbors"]
    total_int = 0
    total_ext = 0
    for sub in topology.subgraphs:
        n_ext = int(sub.ext_primary.sum())
        total_int += sub.internal_edge_count
        total_ext += n_ext
        lines.append(
            f"{sub.sg_id:<3d} {sub.n_local:>8d} {len(sub.border_vertices):>8d} "
            f"{sub.internal_edge_count:>15d} {len(sub.ext_eid):>15d}  "
            f"{','.join(map(str, sub.neighbor_sgs)) or '-'}"
        )
    lines.append(f"total: {total_int} internal + {total_ext} external edges")
    return "\n".join(lines)
