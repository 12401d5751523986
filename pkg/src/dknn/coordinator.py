"""Query coordination: result collection, pruning, termination detection.

One coordinator serves every query. Per query it keeps a k-best result
queue whose k-th distance is the upper bound eps, a table of Euclidean
lower bounds from the query vertex to every subgraph, the effective
subgraph set, and the acknowledgment buffer of the two-way token matching
protocol. A query terminates exactly when every dispatched message has been
acknowledged; acks may arrive before their dispatch notices (delivery is
unordered), so unmatched acks wait in a side buffer and block termination
until the notice shows up.
"""

from __future__ import annotations

import heapq
import logging
import math
import time
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import QueryError
from .graph import GraphSnapshot
from .messages import COORDINATOR, AckToken, EpsUpdate, QueryMessage
from .partition import Topology

INF = float("inf")
log = logging.getLogger("dknn.coordinator")


class Mode(Enum):
    """Bound-propagation policy.

    PRUNE: broadcast new bounds to the effective subgraph set only and kill
    pruned subgraphs with a zero bound. BROADCAST: send every new bound to
    all subgraphs. EXHAUSTIVE: never propagate bounds (workers explore
    unboundedly). Results are identical across modes; only work differs.
    """

    PRUNE = "pr"
    EXHAUSTIVE = "eh"
    BROADCAST = "bc"


@dataclass
class QueryMetrics:
    messages_sent: int = 0        # query messages, root dispatch included
    tokens_created: int = 0
    eps_updates_sent: int = 0     # positive bound broadcasts
    eps_kills_sent: int = 0       # zero-bound kill signals
    subgraphs_accessed: int = 0   # D: subgraphs that ran a non-empty pass
    dijkstra_runs: int = 0
    settled_vertices: int = 0     # distinct per-subgraph vertices settled
    wall_ms: float = 0.0
    late_candidates: int = 0


@dataclass
class QueryResult:
    qid: int
    v_q: int
    k: int
    entries: tuple[tuple[int, float], ...]  # ascending (distance, object id)
    insufficient: bool
    metrics: QueryMetrics

    def distances(self) -> list[float]:
        return [d for _, d in self.entries]


class QueryState:
    def __init__(self, qid: int, v_q: int, k: int, euclid_table: np.ndarray):
        self.qid = qid
        self.v_q = v_q
        self.k = k
        self.euclid_table = euclid_table
        self.best_obj: dict[int, float] = {}
        self._heap: list[tuple[float, int]] = []  # lazy max-heap of (-d, -oid)
        self.eps: float = INF
        self.sg_prime: set[int] | None = None     # None until the queue first fills
        self.pending: Counter = Counter()
        self.early_acks: Counter = Counter()
        self.root_token: AckToken | None = None
        self.root_acked = False
        self.finished = False
        self.result: tuple[tuple[int, float], ...] | None = None
        self.metrics = QueryMetrics()
        self.t_submit = time.perf_counter()
        # accounting used by the buffer-conservation invariant
        self.notices_received = 0
        self.acks_received = 0
        self.acks_matched = 0

    # -- result queue -------------------------------------------------------

    def _kth(self) -> float:
        heap = self._heap
        while heap:
            d, oid = -heap[0][0], -heap[0][1]
            if self.best_obj.get(oid) == d:
                return d
            heapq.heappop(heap)
        return INF

    def _evict_worst(self) -> None:
        heap = self._heap
        while heap:
            d, oid = -heap[0][0], -heap[0][1]
            heapq.heappop(heap)
            if self.best_obj.get(oid) == d:
                del self.best_obj[oid]
                return

    def offer(self, oid: int, dist: float) -> bool:
        """Insert a candidate; returns True when the k-th distance changed."""
        if dist >= self.eps:
            return False
        cur = self.best_obj.get(oid)
        if cur is not None:
            if dist >= cur:
                return False
            self.best_obj[oid] = dist
            heapq.heappush(self._heap, (-dist, -oid))
        elif len(self.best_obj) < self.k:
            self.best_obj[oid] = dist
            heapq.heappush(self._heap, (-dist, -oid))
        else:
            self._evict_worst()
            self.best_obj[oid] = dist
            heapq.heappush(self._heap, (-dist, -oid))
        if len(self.best_obj) == self.k:
            new_eps = self._kth()
            if new_eps < self.eps:
                self.eps = new_eps
                return True
        return False

    def snapshot_queue(self) -> list[tuple[int, float]]:
        return sorted(self.best_obj.items(), key=lambda it: (it[1], it[0]))


class Coordinator:
    def __init__(self, snapshot: GraphSnapshot, topology: Topology, mode: Mode = Mode.PRUNE):
        self.snapshot = snapshot
        self.topology = topology
        self.mode = mode
        self.states: dict[int, QueryState] = {}
        self.finished_queries: list[int] = []
        self.dropped_acks = 0

    # -- submission -----------------------------------------------------------

    def compute_lb(self, v_q: int) -> np.ndarray:
        """Euclidean lower bounds E(v_q, SG) per subgraph.

        Minimum straight-line distance from the query vertex to any border
        vertex of the subgraph, divided by the snapshot's admissibility
        factor; 0 for the subgraph owning v_q, inf for subgraphs without
        border vertices (unreachable from outside).
        """
        gamma = self.snapshot.gamma
        m = self.topology.m
        table = np.full(m, INF)
        p = self.snapshot.coords[v_q]
        for sg, coords in self.topology.border_index.items():
            if len(coords) == 0:
                continue
            if gamma <= 0.0 or math.isinf(gamma):
                table[sg] = 0.0
            else:
                d = np.hypot(coords[:, 0] - p[0], coords[:, 1] - p[1])
                table[sg] = float(d.min()) / gamma
        table[self.topology.owner(v_q)] = 0.0
        return table

    def submit_query(self, qid: int, v_q: int, k: int) -> QueryMessage:
        if qid in self.states:
            raise QueryError(f"duplicate query id {qid}")
        if k < 1:
            raise QueryError(f"k must be >= 1, got {k}")
        if not (0 <= v_q < self.snapshot.num_vertices):
            raise QueryError(f"query vertex {v_q} does not exist")
        st = QueryState(qid, v_q, k, self.compute_lb(v_q))
        self.states[qid] = st
        owner = self.topology.owner(v_q)
        root = QueryMessage(
            qid=qid,
            entries=((v_q, 0.0),),
            from_sg=COORDINATOR,
            to_sg=owner,
            seq=0,
            snapshot_version=self.snapshot.version,
        )
        st.root_token = root.token()
        st.pending[st.root_token] += 1
        st.metrics.messages_sent += 1
        st.metrics.tokens_created += 1
        return root

    # -- inbound ---------------------------------------------------------------

    def on_worker_report(self, report) -> tuple[list[tuple[int, EpsUpdate]], bool]:
        """Apply one worker report atomically: notices, candidates, then ack.

        Returns (bound updates to send, whether the query just finished).
        """
        qid = report.qid
        st = self.states[qid]
        was_finished = st.finished
        for token in report.notices:
            self.on_dispatch_notice(token)
        eps_out = self.on_candidates(qid, report.candidates) if report.candidates else []
        self.on_ack(report.ack)
        self.check_termination(qid)
        return eps_out, st.finished and not was_finished

    def on_dispatch_notice(self, token: AckToken) -> None:
        st = self.states[token.qid]
        if st.early_acks[token] > 0:
            st.early_acks[token] -= 1
            if st.early_acks[token] == 0:
                del st.early_acks[token]
            st.acks_matched += 1
        else:
            st.pending[token] += 1
        st.notices_received += 1
        st.metrics.messages_sent += 1
        st.metrics.tokens_created += 1

    def on_ack(self, token: AckToken) -> None:
        st = self.states.get(token.qid)
        if st is None or st.finished:
            self.dropped_acks += 1
            log.info("dropping ack for finished/unknown query %d", token.qid)
            return
        st.acks_received += 1
        if st.pending[token] > 0:
            st.pending[token] -= 1
            if st.pending[token] == 0:
                del st.pending[token]
            st.acks_matched += 1
        else:
            st.early_acks[token] += 1
        if token == st.root_token:
            st.root_acked = True

    def on_candidates(self, qid: int, candidates) -> list[tuple[int, EpsUpdate]]:
        st = self.states[qid]
        if st.finished:
            st.metrics.late_candidates += len(candidates)
            return []
        out: list[tuple[int, EpsUpdate]] = []
        for oid, dist in candidates:
            first_fill = st.sg_prime is None
            if st.offer(oid, dist):
                out.extend(self._broadcast(st, first_fill))
        return out

    def _broadcast(self, st: QueryState, first_fill: bool) -> list[tuple[int, EpsUpdate]]:
        """Propagate a strictly decreased bound according to the mode."""
        if self.mode is Mode.EXHAUSTIVE:
            return []
        qid, eps = st.qid, st.eps
        out: list[tuple[int, EpsUpdate]] = []
        if self.mode is Mode.BROADCAST:
            for sg in range(self.topology.m):
                out.append((sg, EpsUpdate(qid, eps)))
            st.metrics.eps_updates_sent += self.topology.m
            return out
        # PRUNE
        table = st.euclid_table
        if first_fill:
            st.sg_prime = {sg for sg in range(self.topology.m) if table[sg] <= eps}
            pruned = [sg for sg in range(self.topology.m) if sg not in st.sg_prime]
            pruned.sort(key=lambda sg: (-table[sg], sg))
        else:
            pruned = [sg for sg in st.sg_prime if table[sg] > eps]
            pruned.sort(key=lambda sg: (-table[sg], sg))
            st.sg_prime.difference_update(pruned)
        for sg in pruned:
            out.append((sg, EpsUpdate(qid, 0.0)))
        for sg in sorted(st.sg_prime):
            out.append((sg, EpsUpdate(qid, eps)))
        st.metrics.eps_kills_sent += len(pruned)
        st.metrics.eps_updates_sent += len(st.sg_prime)
        return out

    # -- termination ---------------------------------------------------------

    def check_termination(self, qid: int) -> tuple[tuple[int, float], ...] | None:
        """Finalize the query iff its acknowledgment buffer is fully drained."""
        st = self.states[qid]
        if st.finished:
            return st.result
        if st.pending or st.early_acks or not st.root_acked:
            return None
        st.finished = True
        st.result = tuple((oid, d) for oid, d in st.snapshot_queue())
        st.metrics.wall_ms = (time.perf_counter() - st.t_submit) * 1e3
        self.finished_queries.append(qid)
        return st.result

    def result(self, qid: int) -> QueryResult:
        st = self.states[qid]
        assert st.finished and st.result is not None
        return QueryResult(
            qid=qid,
            v_q=st.v_q,
            k=st.k,
            entries=st.result,
            insufficient=len(st.result) < st.k,
            metrics=st.metrics,
        )

    def advance(self, snapshot: GraphSnapshot) -> None:
        """Bind the next snapshot; per-query state of the old epoch is dropped."""
        self.snapshot = snapshot
        self.states.clear()
        self.finished_queries.clear()
