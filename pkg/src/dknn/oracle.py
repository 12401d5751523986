"""Centralized ground truth: full Dijkstra and two whole-graph kNN searches.

These are the reference algorithms the distributed engine is checked against.
They are deliberately independent of the worker implementation: hand-written
heap-based Dijkstra over the global adjacency, no shared kernels, no caches.
``brute_knn`` and ``ine_knn`` give two separately-derived answers so a bug in
one cannot silently validate the engine.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .errors import QueryError
from .graph import GraphSnapshot
from .objects import ObjectStore

INF = float("inf")


@dataclass(frozen=True)
class OracleResult:
    entries: tuple[tuple[int, float], ...]  # (object id, distance), ascending
    settled_count: int
    insufficient: bool  # fewer than k reachable objects

    def distances(self) -> list[float]:
        return [d for _, d in self.entries]


def dijkstra_sssp(snapshot: GraphSnapshot, source: int) -> np.ndarray:
    """Exact shortest distances from ``source`` to every vertex (inf if unreachable)."""
    n = snapshot.num_vertices
    if not (0 <= source < n):
        raise QueryError(f"source vertex {source} does not exist")
    indptr, adj, eids, w = snapshot.indptr, snapshot.adj_vertex, snapshot.adj_edge, snapshot.weights
    dist = np.full(n, INF)
    dist[source] = 0.0
    heap = [(0.0, source)]
    pop, push = heapq.heappop, heapq.heappush
    while heap:
        d, v = pop(heap)
        if d > dist[v]:
            continue
        for i in range(indptr[v], indptr[v + 1]):
            u = adj[i]
            nd = d + w[eids[i]]
            if nd < dist[u]:
                dist[u] = nd
                push(heap, (nd, u))
    return dist


def _objects_by_vertex(store: ObjectStore) -> dict[int, list]:
    by_vertex: dict[int, list] = {}
    for per_vertex in store.by_subgraph.values():
        for vertex, objs in per_vertex.items():
            by_vertex.setdefault(vertex, []).extend(objs)
    return by_vertex


def ine_knn(snapshot: GraphSnapshot, store: ObjectStore, v_q: int, k: int) -> OracleResult:
    """Incremental network expansion from the query vertex.

    Best-first Dijkstra expansion; objects at a settled live vertex are
    admitted at settled distance + remaining cost. Stops once k objects are
    held and the next frontier distance cannot improve the k-th.
    """
    if k < 1:
        raise QueryError(f"k must be >= 1, got {k}")
    n = snapshot.num_vertices
    if not (0 <= v_q < n):
        raise QueryError(f"query vertex {v_q} does not exist")
    by_vertex = _objects_by_vertex(store)
    indptr, adj, eids, w = snapshot.indptr, snapshot.adj_vertex, snapshot.adj_edge, snapshot.weights

    dist: dict[int, float] = {v_q: 0.0}
    settled: set[int] = set()
    frontier = [(0.0, v_q)]
    found: list[tuple[float, int]] = []  # max-heap of (-d, -oid), capped at k
    kth = INF

    while frontier:
        d, v = frontier[0]
        if v in settled:
            heapq.heappop(frontier)
            continue
        if len(found) == k and d >= kth:
            break
        heapq.heappop(frontier)
        settled.add(v)
        for obj in by_vertex.get(v, ()):
            od = d + obj.remaining
            if len(found) < k:
                heapq.heappush(found, (-od, -obj.id))
            elif od < kth:
                heapq.heapreplace(found, (-od, -obj.id))
            if len(found) == k:
                kth = -found[0][0]
        for i in range(indptr[v], indptr[v + 1]):
            u = adj[i]
            nd = d + w[eids[i]]
            if nd < dist.get(u, INF):
                dist[u] = nd
                heapq.heappush(frontier, (nd, u))

    entries = sorted((-nd, -noid) for nd, noid in found)
    return OracleResult(
        entries=tuple((int(oid), float(d)) for d, oid in entries),
        settled_count=len(settled),
        insufficient=len(found) < k,
    )


def brute_knn(snapshot: GraphSnapshot, store: ObjectStore, v_q: int, k: int) -> OracleResult:
    """Full Dijkstra from the query vertex, then sort all object distances."""
    if k < 1:
        raise QueryError(f"k must be >= 1, got {k}")
    dist = dijkstra_sssp(snapshot, v_q)
    scored = sorted(
        (float(dist[obj.live_vertex]) + obj.remaining, obj.id)
        for obj in store.all_objects()
        if dist[obj.live_vertex] < INF
    )
    top = scored[:k]
    return OracleResult(
        entries=tuple((oid, d) for d, oid in top),
        settled_count=int(np.isfinite(dist).sum()),
        insufficient=len(top) < k,
    )
