"""Per-subgraph search worker.

Each worker owns one subgraph and answers expansion requests: starting from
an entry vertex at a known distance from the query vertex, it runs (or
reuses) a subgraph-local Dijkstra, improves the best-known distances of live
and border vertices, emits candidate objects under the query's current upper
bound, and forwards strictly-improved distances of adjacent subgraphs'
border vertices as merged outgoing messages.

All distance bookkeeping uses strict improvement: a value propagates only
when it beats the stored one, which terminates even across equal-cost
cycles. The per-source Dijkstra cache lives for one snapshot and is shared
by every query in it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ._kernels import dijkstra_csr
from .errors import ContractViolation
from .graph import GraphSnapshot
from .messages import AckToken, QueryMessage, WorkerReport
from .objects import ObjectStore
from .partition import SubgraphTopology

INF = float("inf")
log = logging.getLogger("dknn.worker")


@dataclass
class WorkerCounters:
    dijkstra_runs: int = 0
    cache_hits: int = 0
    messages_out: int = 0
    candidates_out: int = 0
    stale_messages: int = 0


@dataclass
class _QueryWork:
    """Per-query attribution of work done inside this subgraph."""

    accessed: bool = False
    dijkstra_runs: int = 0
    components: set[int] = field(default_factory=set)  # fresh-run components


class Worker:
    def __init__(self, topo: SubgraphTopology, snapshot: GraphSnapshot, store: ObjectStore):
        self.topo = topo
        self.sg_id = topo.sg_id
        self.counters = WorkerCounters()
        # query-scoped state, cleared at snapshot changes
        self._best: dict[int, dict[int, float]] = {}    # qid -> vertex -> D(v_q, vertex)
        self._bound: dict[int, float] = {}              # qid -> upper bound (inf default)
        self._dead: set[int] = set()                    # qids killed by a zero bound
        self._work: dict[int, _QueryWork] = {}
        self._out_seq: dict[tuple[int, int], int] = {}  # (qid, dest sg) -> next seq
        # snapshot-scoped state
        self._dij_cache: dict[int, list[float]] = {}    # source vertex -> local distances
        self._local_of: dict[int, int] = {
            int(v): i for i, v in enumerate(topo.vertices)
        }
        self._bind_snapshot(snapshot)
        self._bind_store(store)

    # -- snapshot / store binding ------------------------------------------

    def _bind_snapshot(self, snapshot: GraphSnapshot) -> None:
        self.snapshot = snapshot
        self.version = snapshot.version
        topo = self.topo
        self._weights_local = snapshot.weights[topo.adj_eid] if len(topo.adj_eid) \
            else np.zeros(0, np.float64)
        # flat parallel lists keep the per-entry scan loops cheap
        self._ext_local = topo.ext_local.tolist()
        self._ext_rvert = topo.ext_remote_vertex.tolist()
        self._ext_rsg = topo.ext_remote_sg.tolist()
        self._ext_w = snapshot.weights[topo.ext_eid].tolist() if len(topo.ext_eid) \
            else []
        self._border_pairs = [
            (int(v), self._local_of[int(v)]) for v in topo.border_vertices
        ]

    def _bind_store(self, store: ObjectStore) -> None:
        self.store = store
        live = []
        for vertex, objs in sorted(store.by_subgraph[self.sg_id].items()):
            live.append((
                vertex,
                self._local_of[vertex],
                tuple((o.id, o.remaining) for o in objs),
            ))
        self._live = live
        self._live_by_vertex = {vertex: objs for vertex, _, objs in live}

    # -- message handling ---------------------------------------------------

    def handle_query_message(self, msg: QueryMessage) -> tuple[WorkerReport, list[QueryMessage]]:
        """Process one expansion request; always produces exactly one ack."""
        ack = msg.token()
        qid = msg.qid
        if msg.snapshot_version != self.version:
            # cross-snapshot race: never expected under the barrier runtime
            self.counters.stale_messages += 1
            log.warning("sg %d: stale message for query %d (snapshot %d != %d)",
                        self.sg_id, qid, msg.snapshot_version, self.version)
            return WorkerReport(qid, (), (), ack), []
        if qid in self._dead:
            return WorkerReport(qid, (), (), ack), []

        bound = self._bound.get(qid, INF)
        best = self._best.setdefault(qid, {})
        candidates: list[tuple[int, float]] = []
        improved: dict[int, tuple[int, float]] = {}  # remote vertex -> (sg, dist)
        for v_b, dist in sorted(msg.entries, key=lambda e: (e[1], e[0])):
            cands, impr = self.explore(qid, v_b, dist, bound=bound, best=best)
            candidates.extend(cands)
            for vert, sg, d in impr:
                improved[vert] = (sg, d)  # later entries only store improvements

        outgoing: list[QueryMessage] = []
        notices: list[AckToken] = []
        if improved:
            by_dest: dict[int, list[tuple[int, float]]] = {}
            for vert, (sg, d) in improved.items():
                by_dest.setdefault(sg, []).append((vert, d))
            for sg in sorted(by_dest):
                key = (qid, sg)
                seq = self._out_seq.get(key, 0)
                self._out_seq[key] = seq + 1
                out = QueryMessage(
                    qid=qid,
                    entries=tuple(sorted(by_dest[sg])),
                    from_sg=self.sg_id,
                    to_sg=sg,
                    seq=seq,
                    snapshot_version=self.version,
                )
                notices.append(out.token())
                outgoing.append(out)
        self.counters.messages_out += len(outgoing)
        self.counters.candidates_out += len(candidates)
        return WorkerReport(qid, tuple(candidates), tuple(notices), ack), outgoing

    def explore(
        self,
        qid: int,
        source: int,
        dist: float,
        bound: float | None = None,
        best: dict[int, float] | None = None,
    ) -> tuple[list[tuple[int, float]], list[tuple[int, int, float]]]:
        """Local expansion from one entry vertex.

        Returns (candidate objects, improvements) where improvements are
        (remote border vertex, remote sg, new distance) records that beat the
        previously forwarded value. Rejects the entry when it exceeds the
        query bound or does not strictly improve the stored entry distance.
        """
        if bound is None:
            bound = self._bound.get(qid, INF)
        if best is None:
            best = self._best.setdefault(qid, {})
        if dist > bound:
            return [], []
        prev = best.get(source, INF)
        if dist >= prev:
            return [], []
        best[source] = dist

        work = self._work.get(qid)
        if work is None:
            work = self._work[qid] = _QueryWork()
        work.accessed = True

        candidates: list[tuple[int, float]] = []
        src_objs = self._live_by_vertex.get(source)
        if src_objs is not None:
            # the entry write just improved a live vertex's distance
            for oid, remaining in src_objs:
                od = dist + remaining
                if od < bound:
                    candidates.append((oid, od))

        src_local = self._local_of[source]
        dij = self._dij_cache.get(source)
        if dij is None:
            darr = dijkstra_csr(self.topo.indptr, self.topo.adj_local,
                                self._weights_local, src_local)
            dij = darr.tolist()
            self._dij_cache[source] = dij
            self.counters.dijkstra_runs += 1
            work.dijkstra_runs += 1
            work.components.add(int(self.topo.component[src_local]))
        else:
            self.counters.cache_hits += 1

        best_get = best.get
        for vertex, lidx, objs in self._live:
            cand = dist + dij[lidx]
            if cand < best_get(vertex, INF):
                best[vertex] = cand
                for oid, remaining in objs:
                    od = cand + remaining
                    if od < bound:
                        candidates.append((oid, od))

        # record distances reached at our own border vertices: they gate
        # future entries there (an entry that cannot beat them is useless)
        for vertex, lidx in self._border_pairs:
            cand = dist + dij[lidx]
            if cand < best_get(vertex, INF):
                best[vertex] = cand

        improved: list[tuple[int, int, float]] = []
        ext_rvert, ext_rsg, ext_w = self._ext_rvert, self._ext_rsg, self._ext_w
        for i, lidx in enumerate(self._ext_local):
            cand = dist + dij[lidx] + ext_w[i]
            rv = ext_rvert[i]
            if cand < best_get(rv, INF):
                best[rv] = cand
                improved.append((rv, ext_rsg[i], cand))
        return candidates, improved

    def set_bound(self, qid: int, value: float) -> None:
        """Lower the query's upper bound; zero kills the query locally."""
        cur = self._bound.get(qid, INF)
        if value < cur:
            self._bound[qid] = value
        if self._bound.get(qid, INF) <= 0.0:
            self._dead.add(qid)

    def bound(self, qid: int) -> float:
        return self._bound.get(qid, INF)

    # -- snapshot lifecycle ---------------------------------------------------

    def advance_snapshot(self, snapshot: GraphSnapshot, store: ObjectStore | None = None) -> None:
        """Move to the next snapshot: all per-snapshot caches are dropped.

        The runtime guarantees no query is in flight when this is called.
        """
        if snapshot.version <= self.version:
            raise ContractViolation(
                f"sg {self.sg_id}: snapshot version must increase "
                f"({self.version} -> {snapshot.version})"
            )
        self._dij_cache.clear()
        self._best.clear()
        self._bound.clear()
        self._dead.clear()
        self._work.clear()
        self._out_seq.clear()
        self._bind_snapshot(snapshot)
        self._bind_store(store if store is not None else self.store)

    # -- introspection ----------------------------------------------------------

    def cache_sizes(self) -> tuple[int, int, int]:
        return len(self._dij_cache), len(self._best), len(self._bound)

    def query_distance(self, qid: int, vertex: int) -> float:
        return self._best.get(qid, {}).get(vertex, INF)

    def was_accessed(self, qid: int) -> bool:
        work = self._work.get(qid)
        return bool(work and work.accessed)

    def query_work(self, qid: int) -> tuple[int, int]:
        """(dijkstra runs, distinct settled vertices) attributed to a query."""
        work = self._work.get(qid)
        if not work:
            return 0, 0
        settled = int(sum(self.topo.component_size[c] for c in work.components))
        return work.dijkstra_runs, settled
