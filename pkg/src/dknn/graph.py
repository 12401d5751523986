"""Versioned road-network snapshots.

A snapshot is an undirected weighted graph with vertex coordinates. The
structure (vertices, adjacency) is shared between versions; applying a batch
of weight updates produces a new snapshot that copies only the weight array,
so readers of the old version are never disturbed.

Every snapshot carries an admissibility factor ``gamma``: the maximum over
edges of ``euclid(u, v) / weight``. Dividing a straight-line distance by
``gamma`` yields a sound lower bound on graph distance whatever the cost
units of the weights are (travel time, scaled length, ...).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GraphFormatError, GraphValidationError, UpdateError

INF = math.inf


@dataclass(frozen=True)
class WeightUpdate:
    """Set edge (u, v) to ``new_weight`` in the next snapshot."""

    u: int
    v: int
    new_weight: float


@dataclass
class GraphSnapshot:
    version: int
    coords: np.ndarray      # (n, 2) float64
    indptr: np.ndarray      # (n+1,) int64, CSR row pointers
    adj_vertex: np.ndarray  # (2m,) int32, neighbor per half-edge
    adj_edge: np.ndarray    # (2m,) int32, edge id per half-edge
    edge_u: np.ndarray      # (m,) int32
    edge_v: np.ndarray      # (m,) int32
    weights: np.ndarray     # (m,) float64 -- the only per-version array
    euclid_len: np.ndarray  # (m,) float64, straight-line length per edge
    gamma: float
    gamma_edge: int         # edge attaining gamma, -1 when there are no edges
    source_arc_count: int = 0  # arcs seen in a DIMACS file before collapsing
    _edge_lookup_cache: dict | None = field(default=None, repr=False, compare=False)

    @property
    def num_vertices(self) -> int:
        return len(self.coords)

    @property
    def num_edges(self) -> int:
        return len(self.weights)

    def neighbors(self, v: int) -> tuple[np.ndarray, np.ndarray]:
        """(neighbor vertices, edge ids) incident to ``v``."""
        lo, hi = self.indptr[v], self.indptr[v + 1]
        return self.adj_vertex[lo:hi], self.adj_edge[lo:hi]

    def find_edge(self, u: int, v: int) -> int:
        """Edge id of (u, v), or -1. Scans u's adjacency (degrees are small)."""
        lo, hi = self.indptr[u], self.indptr[u + 1]
        for i in range(lo, hi):
            if self.adj_vertex[i] == v:
                return int(self.adj_edge[i])
        return -1

    def edge_weight(self, u: int, v: int) -> float:
        eid = self.find_edge(u, v)
        if eid < 0:
            raise GraphValidationError(f"no edge ({u},{v})")
        return float(self.weights[eid])

    def edges(self):
        """Iterate (u, v, weight) over undirected edges."""
        for i in range(self.num_edges):
            yield int(self.edge_u[i]), int(self.edge_v[i]), float(self.weights[i])


def euclid(coords: np.ndarray, u: int, v: int) -> float:
    dx = coords[u, 0] - coords[v, 0]
    dy = coords[u, 1] - coords[v, 1]
    return math.hypot(dx, dy)


def _compute_gamma(euclid_len: np.ndarray, weights: np.ndarray) -> tuple[float, int]:
    if len(weights) == 0:
        return 0.0, -1
    zero = weights <= 0.0
    if np.any(zero & (euclid_len > 0.0)):
        # A zero-cost edge spanning distinct points makes Euclidean bounds
        # vacuous; gamma = inf keeps euclid_lower_bound sound (it returns 0).
        bad = int(np.argmax(zero & (euclid_len > 0.0)))
        return INF, bad
    pos = ~zero
    if not np.any(pos):
        return 0.0, -1
    ratios = np.where(pos, euclid_len / np.where(pos, weights, 1.0), -1.0)
    idx = int(np.argmax(ratios))
    return float(ratios[idx]), idx


def build_snapshot(
    coords: np.ndarray,
    edge_u: np.ndarray,
    edge_v: np.ndarray,
    weights: np.ndarray,
    version: int = 0,
    source_arc_count: int = 0,
) -> GraphSnapshot:
    """Assemble a snapshot from an undirected edge list.

    Validates ids, rejects self-loops and negative weights; the adjacency is
    stored symmetrically (each edge appears in both endpoint lists).
    """
    coords = np.asarray(coords, dtype=np.float64).reshape(-1, 2)
    edge_u = np.asarray(edge_u, dtype=np.int32)
    edge_v = np.asarray(edge_v, dtype=np.int32)
    weights = np.asarray(weights, dtype=np.float64)
    n = len(coords)
    m = len(weights)
    if len(edge_u) != m or len(edge_v) != m:
        raise GraphValidationError("edge arrays have mismatched lengths")
    if m:
        if edge_u.min(initial=0) < 0 or edge_v.min(initial=0) < 0 \
                or edge_u.max(initial=-1) >= n or edge_v.max(initial=-1) >= n:
            raise GraphValidationError("edge endpoint out of range")
        if np.any(edge_u == edge_v):
            raise GraphValidationError("self-loops are not allowed")
        if np.any(weights < 0):
            raise GraphValidationError("negative edge weight")

    half_src = np.concatenate([edge_u, edge_v])
    half_dst = np.concatenate([edge_v, edge_u])
    half_eid = np.concatenate([np.arange(m, dtype=np.int32)] * 2) if m else np.zeros(0, np.int32)
    order = np.argsort(half_src, kind="stable")
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, half_src + 1, 1)
    indptr = np.cumsum(indptr)

    euclid_len = np.hypot(
        coords[edge_u, 0] - coords[edge_v, 0],
        coords[edge_u, 1] - coords[edge_v, 1],
    ) if m else np.zeros(0, np.float64)
    gamma, gamma_edge = _compute_gamma(euclid_len, weights)

    return GraphSnapshot(
        version=version,
        coords=coords,
        indptr=indptr,
        adj_vertex=half_dst[order].astype(np.int32),
        adj_edge=half_eid[order].astype(np.int32),
        edge_u=edge_u,
        edge_v=edge_v,
        weights=weights,
        euclid_len=euclid_len,
        gamma=gamma,
        gamma_edge=gamma_edge,
        source_arc_count=source_arc_count,
    )


# ---------------------------------------------------------------------------
# DIMACS loading

def _parse_coord_file(path: str) -> dict[int, tuple[float, float]]:
    coords: dict[int, tuple[float, float]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line[0] in ("c", "p"):
                continue
            parts = line.split()
            if parts[0] != "v" or len(parts) != 4:
                raise GraphFormatError(path, line_no, f"expected 'v id x y', got {line!r}")
            try:
                vid = int(parts[1])
                x, y = float(parts[2]), float(parts[3])
            except ValueError as exc:
                raise GraphFormatError(path, line_no, str(exc)) from exc
            coords[vid] = (x, y)
    return coords


def load_dimacs(graph_file: str, coord_file: str) -> GraphSnapshot:
    """Load DIMACS 9th-challenge ``.gr`` / ``.co`` files as snapshot version 0.

    The ``.gr`` arc list is directed; arc pairs are collapsed to one
    undirected edge keeping the minimum weight when the pair is asymmetric
    (parallel arcs collapse the same way). Self-loop arcs are dropped. The
    number of arcs seen is kept on the snapshot for reporting.
    """
    raw_coords = _parse_coord_file(coord_file)

    n_declared = None
    arcs = 0
    edge_w: dict[tuple[int, int], float] = {}
    with open(graph_file, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line[0] == "c":
                continue
            parts = line.split()
            if parts[0] == "p":
                if len(parts) != 4 or parts[1] != "sp":
                    raise GraphFormatError(graph_file, line_no, f"bad problem line {line!r}")
                n_declared = int(parts[2])
                continue
            if parts[0] != "a" or len(parts) != 4:
                raise GraphFormatError(graph_file, line_no, f"expected 'a u v w', got {line!r}")
            try:
                u, v, w = int(parts[1]), int(parts[2]), float(parts[3])
            except ValueError as exc:
                raise GraphFormatError(graph_file, line_no, str(exc)) from exc
            if w < 0:
                raise GraphValidationError(f"{graph_file}:{line_no}: negative weight {w}")
            arcs += 1
            if u == v:
                continue
            key = (u, v) if u < v else (v, u)
            prev = edge_w.get(key)
            if prev is None or w < prev:
                edge_w[key] = w

    if n_declared is None:
        max_seen = max((max(k) for k in edge_w), default=0)
        n_declared = max(max_seen, max(raw_coords, default=0))

    missing = [vid for vid in range(1, n_declared + 1) if vid not in raw_coords]
    if missing:
        raise GraphValidationError(
            f"{coord_file}: {len(missing)} vertices without coordinates "
            f"(first: {missing[:5]})"
        )
    for key in edge_w:
        if key[0] < 1 or key[1] > n_declared:
            raise GraphValidationError(f"{graph_file}: arc endpoint {key} out of range 1..{n_declared}")

    coords = np.zeros((n_declared, 2), dtype=np.float64)
    for vid in range(1, n_declared + 1):
        coords[vid - 1] = raw_coords[vid]

    items = sorted(edge_w.items())
    edge_u = np.array([k[0] - 1 for k, _ in items], dtype=np.int32)
    edge_v = np.array([k[1] - 1 for k, _ in items], dtype=np.int32)
    weights = np.array([w for _, w in items], dtype=np.float64)
    return build_snapshot(coords, edge_u, edge_v, weights, version=0, source_arc_count=arcs)


# ---------------------------------------------------------------------------
# Updates

def apply_updates(snapshot: GraphSnapshot, updates: list[WeightUpdate]) -> GraphSnapshot:
    """Produce the next snapshot version with the listed edge weights changed.

    Atomic: if any update references a missing edge, nothing is applied and
    the offenders are reported. Only the weight array is copied; gamma is
    refreshed incrementally unless the previous extreme edge shrank.
    """
    edge_ids = np.empty(len(updates), dtype=np.int64)
    offenders: list[tuple[int, int]] = []
    for i, up in enumerate(updates):
        if up.new_weight < 0:
            raise GraphValidationError(f"negative weight {up.new_weight} for edge ({up.u},{up.v})")
        eid = snapshot.find_edge(up.u, up.v) if 0 <= up.u < snapshot.num_vertices else -1
        if eid < 0:
            offenders.append((up.u, up.v))
        edge_ids[i] = eid
    if offenders:
        raise UpdateError(offenders)

    new_weights = snapshot.weights.copy()
    for i, up in enumerate(updates):
        new_weights[edge_ids[i]] = up.new_weight

    if len(updates) == 0:
        gamma, gamma_edge = snapshot.gamma, snapshot.gamma_edge
    else:
        changed = np.unique(edge_ids)
        g_changed, idx_changed = _compute_gamma(
            snapshot.euclid_len[changed], new_weights[changed]
        )
        if snapshot.gamma_edge >= 0 and snapshot.gamma_edge in set(changed.tolist()) \
                and g_changed < snapshot.gamma:
            # the previous extreme edge may have shrunk: full rescan
            gamma, gamma_edge = _compute_gamma(snapshot.euclid_len, new_weights)
        elif g_changed > snapshot.gamma:
            gamma, gamma_edge = g_changed, int(changed[idx_changed])
        else:
            gamma, gamma_edge = snapshot.gamma, snapshot.gamma_edge

    return GraphSnapshot(
        version=snapshot.version + 1,
        coords=snapshot.coords,
        indptr=snapshot.indptr,
        adj_vertex=snapshot.adj_vertex,
        adj_edge=snapshot.adj_edge,
        edge_u=snapshot.edge_u,
        edge_v=snapshot.edge_v,
        weights=new_weights,
        euclid_len=snapshot.euclid_len,
        gamma=gamma,
        gamma_edge=gamma_edge,
        source_arc_count=snapshot.source_arc_count,
    )


def euclid_lower_bound(snapshot: GraphSnapshot, u: int, v: int) -> float:
    """Sound lower bound on the graph distance between two vertices.

    Returns ``euclid(u, v) / gamma``; 0 when gamma is 0 (no edges) or
    infinite (zero-cost edges present).
    """
    n = snapshot.num_vertices
    if not (0 <= u < n and 0 <= v < n):
        raise GraphValidationError(f"vertex out of range: ({u},{v})")
    g = snapshot.gamma
    if g <= 0.0 or math.isinf(g):
        return 0.0
    return euclid(snapshot.coords, u, v) / g


# ---------------------------------------------------------------------------
# Update-stream files: one "u v new_weight" per line, '#'-prefixed separator
# lines (conventionally "# snapshot") split batches.

def read_update_stream(path: str) -> list[list[WeightUpdate]]:
    batches: list[list[WeightUpdate]] = [[]]
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
                raise GraphFormatError(path, line_no, f"expected 'u v new_weight', got {line!r}")
            try:
                batches[-1].append(WeightUpdate(int(parts[0]), int(parts[1]), float(parts[2])))
            except ValueError as exc:
                raise GraphFormatError(path, line_no, str(exc)) from exc
    if batches and not batches[-1]:
        batches.pop()
    return batches


def write_update_stream(path: str, batches: list[list[WeightUpdate]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for i, batch in enumerate(batches):
            if i:
                fh.write("# snapshot\n")
            for up in batch:
                fh.write(f"{up.u} {up.v} {up.new_weight!r}\n")
