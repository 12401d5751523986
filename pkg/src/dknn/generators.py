"""Synthetic road networks and randomized test instances.

Everything here is deterministic for a given seed. Generated graphs keep
their admissibility factor bounded (coordinates are rescaled when needed) so
Euclidean pruning stays informative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import GraphSnapshot, build_snapshot
from .objects import ObjectStore, generate_objects
from .partition import PartitionMap, Topology, derive_topology, partition_rcb

NY_VERTICES = 264_346
NY_EDGES = 733_846


def _rescale_for_gamma(coords: np.ndarray, eu, ev, weights, gamma_cap: float) -> np.ndarray:
    if len(weights) == 0:
        return coords
    euclid = np.hypot(coords[eu, 0] - coords[ev, 0], coords[eu, 1] - coords[ev, 1])
    pos = weights > 0
    if not pos.any():
        return coords
    gamma = float((euclid[pos] / weights[pos]).max())
    if gamma > gamma_cap:
        coords = coords * (gamma_cap / gamma) * (1.0 - 1e-12)
    return coords


def random_connected_graph(
    n: int,
    extra_edges: int,
    seed: int,
    weight_range: tuple[float, float] = (1.0, 10.0),
    gamma_cap: float = 2.0,
) -> GraphSnapshot:
    """Random recursive tree plus extra chords; connected by construction."""
    rng = np.random.default_rng(seed)
    coords = rng.uniform(0.0, 100.0, size=(n, 2))
    seen: set[tuple[int, int]] = set()
    eu: list[int] = []
    ev: list[int] = []
    for v in range(1, n):
        u = int(rng.integers(0, v))
        eu.append(u)
        ev.append(v)
        seen.add((u, v))
    tries = 0
    while extra_edges > 0 and tries < 20 * extra_edges + 100:
        tries += 1
        u = int(rng.integers(0, n))
        v = int(rng.integers(0, n))
        if u == v:
            continue
        key = (u, v) if u < v else (v, u)
        if key in seen:
            continue
        seen.add(key)
        eu.append(key[0])
        ev.append(key[1])
        extra_edges -= 1
    eu_arr = np.array(eu, dtype=np.int32)
    ev_arr = np.array(ev, dtype=np.int32)
    weights = rng.uniform(*weight_range, size=len(eu_arr))
    coords = _rescale_for_gamma(coords, eu_arr, ev_arr, weights, gamma_cap)
    return build_snapshot(coords, eu_arr, ev_arr, weights)


def grid_graph(side: int, weight: float = 1.0) -> GraphSnapshot:
    """side x side unit grid; gamma is exactly euclid(1)/weight."""
    n = side * side
    ii, jj = np.meshgrid(np.arange(side), np.arange(side), indexing="ij")
    coords = np.column_stack([jj.ravel(), ii.ravel()]).astype(np.float64)
    v = np.arange(n).reshape(side, side)
    h_u, h_v = v[:, :-1].ravel(), v[:, 1:].ravel()
    v_u, v_v = v[:-1, :].ravel(), v[1:, :].ravel()
    eu = np.concatenate([h_u, v_u]).astype(np.int32)
    ev = np.concatenate([h_v, v_v]).astype(np.int32)
    weights = np.full(len(eu), float(weight))
    return build_snapshot(coords, eu, ev, weights)


def ny_scale_graph(seed: int = 0) -> GraphSnapshot:
    """Synthetic stand-in with the vertex/edge counts of the NY road network.

    A jittered grid carrying the bulk of the vertices, a few stragglers
    attached at random, and random chords topping the edge count up to the
    target. Used where tests need NY-sized inputs without shipping the
    DIMACS files.
    """
    rng = np.random.default_rng(seed)
    side = int(np.sqrt(NY_VERTICES))  # 514
    grid_n = side * side
    n = NY_VERTICES
    ii, jj = np.meshgrid(np.arange(side), np.arange(side), indexing="ij")
    coords = np.empty((n, 2))
    coords[:grid_n, 0] = jj.ravel()
    coords[:grid_n, 1] = ii.ravel()
    coords[:grid_n] += rng.uniform(-0.2, 0.2, size=(grid_n, 2))
    coords[grid_n:] = rng.uniform(0, side - 1, size=(n - grid_n, 2))

    v = np.arange(grid_n).reshape(side, side)
    eu_parts = [v[:, :-1].ravel(), v[:-1, :].ravel()]
    ev_parts = [v[:, 1:].ravel(), v[1:, :].ravel()]
    # attach the non-grid stragglers
    extra_ids = np.arange(grid_n, n)
    eu_parts.append(extra_ids)
    ev_parts.append(rng.integers(0, grid_n, size=len(extra_ids)))
    eu = np.concatenate(eu_parts).astype(np.int64)
    ev = np.concatenate(ev_parts).astype(np.int64)

    need = NY_EDGES - len(eu)
    existing = set((eu * n + ev).tolist()) | set((ev * n + eu).tolist())
    chords_u = []
    chords_v = []
    while need > 0:
        a = rng.integers(0, n, size=need * 2)
        b = rng.integers(0, n, size=need * 2)
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        ok = lo != hi
        code = lo * n + hi
        code, idx = np.unique(code[ok], return_index=True)
        lo, hi = lo[ok][idx], hi[ok][idx]
        fresh = np.array([c not in existing for c in code.tolist()])
        lo, hi, code = lo[fresh], hi[fresh], code[fresh]
        take = min(need, len(lo))
        chords_u.append(lo[:take])
        chords_v.append(hi[:take])
        existing.update(code[:take].tolist())
        need -= take
    eu = np.concatenate([eu] + chords_u).astype(np.int32)
    ev = np.concatenate([ev] + chords_v).astype(np.int32)
    euclid = np.hypot(coords[eu, 0] - coords[ev, 0], coords[eu, 1] - coords[ev, 1])
    weights = euclid * rng.uniform(1.0, 2.0, size=len(eu)) + 1e-9
    return build_snapshot(coords, eu, ev, weights)


@dataclass
class Instance:
    seed: int
    snapshot: GraphSnapshot
    partition: PartitionMap
    topology: Topology
    store: ObjectStore
    v_q: int
    k: int


def random_instance(seed: int, max_vertices: int = 200) -> Instance:
    """Small randomized instance: graph, partition, objects, one query."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(20, max_vertices + 1))
    extra = int(rng.integers(0, max(1, n // 2)))
    snapshot = random_connected_graph(n, extra, seed=int(rng.integers(0, 2**31)))
    m = int(rng.integers(2, 9))
    partition = partition_rcb(snapshot, m)
    topology = derive_topology(snapshot, partition)
    mu = int(rng.integers(5, 51))
    store = generate_objects(snapshot, partition, mu, seed=int(rng.integers(0, 2**31)))
    v_q = int(rng.integers(0, n))
    k = int(rng.integers(1, 11))
    return Instance(seed, snapshot, partition, topology, store, v_q, k)
