"""In-process message-passing runtime.

One logical worker per subgraph plus one coordinator, each with a private
mailbox and serialized message handling. Delivery is reliable, exactly-once,
and unordered across sender-receiver pairs (FIFO per pair is available as a
toggle for differential testing). Mailboxes are banded: coordinator-bound
reports drain first, bound updates next, expansion messages last, so control
traffic outruns exploration; within a band the deterministic scheduler picks
envelopes in a seeded random order and the concurrent scheduler runs worker
mailboxes on tau OS threads.

A snapshot change is a global barrier: it requires quiescence, rebuilds the
weight-dependent state of every actor, and clears all per-snapshot caches.
"""

from __future__ import annotations

import os
import random
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from queue import Empty, PriorityQueue

from . import _kernels
from .coordinator import Coordinator, Mode, QueryResult
from .errors import ContractViolation, ProtocolViolation
from .graph import GraphSnapshot, WeightUpdate, apply_updates
from .messages import (
    COORDINATOR,
    Envelope,
    EpsUpdate,
    QueryMessage,
    QuerySubmit,
    WorkerReport,
)
from .objects import ObjectStore
from .partition import Topology
from .worker import Worker

_BAND_COUNT = 3
_SENTINEL = object()


@dataclass
class RuntimeConfig:
    tau: int = 1
    mode: Mode = Mode.PRUNE
    scheduler: str = "deterministic"  # "deterministic" | "concurrent"
    seed: int = 0
    fifo_per_pair: bool = False
    trace_path: str | None = None
    fault: str | None = None  # test hooks: "epsilon_overprune" | "drop_report"


@dataclass
class BatchResult:
    results: dict[int, QueryResult]
    wall_s: float
    envelopes: int

    def ordered(self) -> list[QueryResult]:
        return [self.results[qid] for qid in sorted(self.results)]


class System:
    """A spawned topology: workers, coordinator, mailboxes, metrics."""

    def __init__(self, snapshot: GraphSnapshot, topology: Topology,
                 store: ObjectStore, config: RuntimeConfig):
        if config.tau < 1:
            raise ContractViolation(f"tau must be >= 1, got {config.tau}")
        if config.scheduler not in ("deterministic", "concurrent"):
            raise ContractViolation(f"unknown scheduler {config.scheduler!r}")
        self.snapshot = snapshot
        self.topology = topology
        self.store = store
        self.config = config
        self.workers = {
            sub.sg_id: Worker(sub, snapshot, store) for sub in topology.subgraphs
        }
        self.coordinator = Coordinator(snapshot, topology, config.mode)
        self._next_qid = 0
        self._seq = 0
        self._rng = random.Random(config.seed)
        self.sends: dict[int, int] = {}
        self.receives: dict[int, int] = {}
        self._trace = None
        trace_path = config.trace_path
        if trace_path is None and os.environ.get("DKNN_TRACE") == "1":
            trace_path = "dknn_trace.log"
        if trace_path:
            self._trace = open(trace_path, "w", encoding="utf-8")
        self._trace_lock = threading.Lock()
        # deterministic mailboxes
        self._bands: list[list[Envelope]] = [[] for _ in range(_BAND_COUNT)]
        self._pair_queues: dict[tuple[int, int, int], deque] = {}
        self._pending_count = 0
        # concurrent machinery (built on first concurrent run)
        self._units: list[PriorityQueue] | None = None
        self._threads: list[threading.Thread] = []
        self._lock = threading.Lock()
        self._inflight = 0
        self._batch_submitted = 0
        self._batch_finished = 0
        self._done = threading.Event()
        self._violation: str | None = None
        if _kernels.HAVE_NUMBA:
            _kernels.warmup()

    # -- introspection ------------------------------------------------------

    @property
    def num_workers(self) -> int:
        return len(self.workers)

    def check_delivery_accounting(self) -> None:
        assert self.sends == self.receives, (self.sends, self.receives)

    # -- envelope plumbing ----------------------------------------------------

    def _emit(self, src: int, dst: int, payload) -> None:
        with self._lock:
            self._seq += 1
            env = Envelope(self._seq, src, dst, payload)
            self.sends[dst] = self.sends.get(dst, 0) + 1
            if self._units is not None:
                self._inflight += 1
        if self._units is not None:
            self._unit_for(dst).put((env.band, env.seq, env))
        else:
            self._pending_count += 1
            if self.config.fifo_per_pair:
                key = (env.band, src, dst)
                q = self._pair_queues.get(key)
                if q is None:
                    q = self._pair_queues[key] = deque()
                q.append(env)
            else:
                self._bands[env.band].append(env)

    def _record_receive(self, env: Envelope) -> None:
        self.receives[env.dst] = self.receives.get(env.dst, 0) + 1
        if self._trace:
            src = "c" if env.src == COORDINATOR else str(env.src)
            dst = "c" if env.dst == COORDINATOR else str(env.dst)
            qid = getattr(env.payload, "qid", -1)
            with self._trace_lock:
                self._trace.write(f"{env.seq} {src} {dst} {env.kind} {qid}\n")

    def _process(self, env: Envelope) -> None:
        self._record_receive(env)
        payload = env.payload
        if env.dst == COORDINATOR:
            if isinstance(payload, QuerySubmit):
                root = self.coordinator.submit_query(payload.qid, payload.v_q, payload.k)
                self._emit(COORDINATOR, root.to_sg, root)
            elif isinstance(payload, WorkerReport):
                eps_out, finished = self.coordinator.on_worker_report(payload)
                for sg, upd in eps_out:
                    self._emit(COORDINATOR, sg, upd)
                if finished:
                    with self._lock:
                        self._batch_finished += 1
            else:  # pragma: no cover - no other coordinator payloads exist
                raise ContractViolation(f"coordinator got {type(payload).__name__}")
        else:
            worker = self.workers[env.dst]
            if isinstance(payload, QueryMessage):
                report, outgoing = worker.handle_query_message(payload)
                if self.config.fault != "drop_report":
                    self._emit(env.dst, COORDINATOR, report)
                for msg in outgoing:
                    self._emit(env.dst, msg.to_sg, msg)
            elif isinstance(payload, EpsUpdate):
                value = payload.value
                if self.config.fault == "epsilon_overprune" and 0.0 < value < float("inf"):
                    value = 0.0
                worker.set_bound(payload.qid, value)
            else:  # pragma: no cover
                raise ContractViolation(f"worker got {type(payload).__name__}")

    # -- deterministic scheduler ----------------------------------------------

    def _drain_deterministic(self) -> int:
        processed = 0
        rng = self._rng
        if self.config.fifo_per_pair:
            while self._pending_count:
                band = min(k[0] for k, q in self._pair_queues.items() if q)
                keys = [k for k, q in self._pair_queues.items() if q and k[0] == band]
                env = self._pair_queues[keys[rng.randrange(len(keys))]].popleft()
                self._pending_count -= 1
                self._process(env)
                processed += 1
        else:
            bands = self._bands
            while self._pending_count:
                for band in bands:
                    if band:
                        break
                i = rng.randrange(len(band))
                band[i], band[-1] = band[-1], band[i]
                env = band.pop()
                self._pending_count -= 1
                self._process(env)
                processed += 1
        return processed

    # -- concurrent scheduler ---------------------------------------------------

    def _unit_for(self, dst: int) -> PriorityQueue:
        assert self._units is not None
        if dst == COORDINATOR:
            return self._units[-1]
        return self._units[dst % self.config.tau]

    def _dec_inflight(self) -> None:
        with self._lock:
            self._inflight -= 1
            if self._inflight == 0:
                if self._batch_finished < self._batch_submitted:
                    self._violation = self._dump_state()
                self._done.set()

    def _unit_loop(self, q: PriorityQueue) -> None:
        while True:
            _, _, env = q.get()
            if env is _SENTINEL:
                return
            self._process(env)
            self._dec_inflight()

    def _start_units(self) -> None:
        self._units = [PriorityQueue() for _ in range(self.config.tau + 1)]
        self._threads = []
        for i, q in enumerate(self._units):
            name = "dknn-coordinator" if i == self.config.tau else f"dknn-unit-{i}"
            t = threading.Thread(target=self._unit_loop, args=(q,), name=name, daemon=True)
            t.start()
            self._threads.append(t)

    def _stop_units(self) -> None:
        if self._units is None:
            return
        for q in self._units:
            q.put((_BAND_COUNT, 1 << 62, _SENTINEL))
        for t in self._threads:
            t.join()
        self._units = None
        self._threads = []

    # -- public API ------------------------------------------------------------

    def submit(self, v_q: int, k: int, qid: int | None = None) -> int:
        if qid is None:
            qid = self._next_qid
        self._next_qid = max(self._next_qid, qid) + 1
        with self._lock:
            self._batch_submitted += 1
        self._emit(COORDINATOR, COORDINATOR, QuerySubmit(qid, v_q, k))
        return qid

    def run_until_quiescent(self, queries=()) -> BatchResult:
        """Submit a batch, run to completion, return per-query results.

        Raises ProtocolViolation if the system drains with an unfinished
        query (the termination-theorem watchdog; it must never fire).
        """
        t0 = time.perf_counter()
        seq0 = self._seq
        with self._lock:
            self._batch_submitted = 0
            self._batch_finished = 0
        concurrent = self.config.scheduler == "concurrent"
        if concurrent and self._units is None:
            self._start_units()
        if concurrent:
            self._done.clear()
            self._violation = None
            with self._lock:
                self._inflight += 1  # guard: batch not done until all submits are out
        qids = [self.submit(v_q, k) for v_q, k in queries]
        if concurrent:
            self._dec_inflight()
            if not self._done.wait(timeout=600.0):
                raise ProtocolViolation("concurrent batch timed out", self._dump_state())
            if self._violation is not None and qids:
                raise ProtocolViolation("mailboxes drained with unfinished queries",
                                        self._violation)
            with self._lock:
                pass  # barrier: unit threads are idle, their writes are visible
        else:
            self._drain_deterministic()
            unfinished = [q for q in qids if not self.coordinator.states[q].finished]
            if unfinished:
                raise ProtocolViolation(
                    f"mailboxes drained with unfinished queries {unfinished}",
                    self._dump_state(),
                )

        results: dict[int, QueryResult] = {}
        for qid in qids:
            res = self.coordinator.result(qid)
            self._attach_worker_metrics(res)
            results[qid] = res
        return BatchResult(results=results, wall_s=time.perf_counter() - t0,
                           envelopes=self._seq - seq0)

    def _attach_worker_metrics(self, res: QueryResult) -> None:
        d = runs = settled = 0
        for worker in self.workers.values():
            if worker.was_accessed(res.qid):
                d += 1
            r, s = worker.query_work(res.qid)
            runs += r
            settled += s
        res.metrics.subgraphs_accessed = d
        res.metrics.dijkstra_runs = runs
        res.metrics.settled_vertices = settled

    def snapshot_barrier(
        self,
        updates: list[WeightUpdate] | None = None,
        moves: list[tuple[int, int, float]] | None = None,
    ) -> None:
        """Apply weight updates and object moves, then advance every actor.

        Requires quiescence: with the blocking run API there is never a query
        in flight when this is called; leftover mail would be a bug.
        """
        if self._pending_count or (self._units is not None and self._inflight):
            raise ContractViolation("snapshot barrier with messages in flight")
        self._stop_units()
        new_snapshot = apply_updates(self.snapshot, updates or [])
        for oid, vertex, remaining in moves or []:
            self.store.move(oid, vertex, remaining)
        self.snapshot = new_snapshot
        for worker in self.workers.values():
            worker.advance_snapshot(new_snapshot, self.store)
        self.coordinator.advance(new_snapshot)

    def close(self) -> None:
        self._stop_units()
        if self._trace:
            self._trace.close()
            self._trace = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _dump_state(self) -> str:
        lines = []
        for qid, st in self.coordinator.states.items():
            if not st.finished:
                lines.append(
                    f"query {qid}: pending={dict(st.pending)} "
                    f"early_acks={dict(st.early_acks)} root_acked={st.root_acked}"
                )
        lines.append(f"mailbox bands: {[len(b) for b in self._bands]}")
        return "\n".join(lines)


def spawn_topology(snapshot: GraphSnapshot, topology: Topology,
                   store: ObjectStore, config: RuntimeConfig | None = None) -> System:
    """Wire up one worker per subgraph plus a coordinator, mailboxes empty."""
    return System(snapshot, topology, store, config or RuntimeConfig())
