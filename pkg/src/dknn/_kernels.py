"""Single-source shortest paths over a CSR adjacency.

The hot path of every search worker. Compiled with numba when available
(``nogil`` so concurrent workers overlap); the pure-Python fallback has
identical semantics. Distances accumulate as float64 sums along shortest
paths, so both variants produce bit-identical results on the same input.
"""

from __future__ import annotations

import heapq

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is an optional accelerator
    HAVE_NUMBA = False

INF = float("inf")


def _dijkstra_csr_py(indptr, adj, weights, src: int) -> np.ndarray:
    n = len(indptr) - 1
    dist = np.full(n, INF)
    dist[src] = 0.0
    heap = [(0.0, src)]
    pop, push = heapq.heappop, heapq.heappush
    while heap:
        d, v = pop(heap)
        if d > dist[v]:
            continue
        for i in range(indptr[v], indptr[v + 1]):
            u = adj[i]
            nd = d + weights[i]
            if nd < dist[u]:
                dist[u] = nd
                push(heap, (nd, u))
    return dist


if HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def _dijkstra_csr_nb(indptr, adj, weights, src):  # pragma: no cover - jitted
        n = len(indptr) - 1
        dist = np.full(n, np.inf)
        dist[src] = 0.0
        cap = len(adj) + 2
        heap_d = np.empty(cap, np.float64)
        heap_v = np.empty(cap, np.int64)
        heap_d[0] = 0.0
        heap_v[0] = src
        size = 1
        while size > 0:
            d = heap_d[0]
            v = heap_v[0]
            size -= 1
            heap_d[0] = heap_d[size]
            heap_v[0] = heap_v[size]
            i = 0
            while True:
                left = 2 * i + 1
                right = left + 1
                smallest = i
                if left < size and heap_d[left] < heap_d[smallest]:
                    smallest = left
                if right < size and heap_d[right] < heap_d[smallest]:
                    smallest = right
                if smallest == i:
                    break
                heap_d[i], heap_d[smallest] = heap_d[smallest], heap_d[i]
                heap_v[i], heap_v[smallest] = heap_v[smallest], heap_v[i]
                i = smallest
            if d > dist[v]:
                continue
            for e in range(indptr[v], indptr[v + 1]):
                u = adj[e]
                nd = d + weights[e]
                if nd < dist[u]:
                    dist[u] = nd
                    heap_d[size] = nd
                    heap_v[size] = u
                    i = size
                    size += 1
                    while i > 0:
                        parent = (i - 1) // 2
                        if heap_d[parent] <= heap_d[i]:
                            break
                        heap_d[i], heap_d[parent] = heap_d[parent], heap_d[i]
                        heap_v[i], heap_v[parent] = heap_v[parent], heap_v[i]
                        i = parent
        return dist

    def dijkstra_csr(indptr, adj, weights, src: int) -> np.ndarray:
        return _dijkstra_csr_nb(indptr, adj, weights, src)

else:
    dijkstra_csr = _dijkstra_csr_py


def warmup() -> None:
    """Trigger jit compilation outside of timed sections."""
    indptr = np.array([0, 1, 2], dtype=np.int64)
    adj = np.array([1, 0], dtype=np.int32)
    w = np.array([1.0, 1.0])
    dijkstra_csr(indptr, adj, w, 0)
