"""Wire records exchanged between search workers and the coordinator."""

from __future__ import annotations

from dataclasses import dataclass, field

COORDINATOR = -1  # pseudo subgraph id for coordinator-originated dispatches


@dataclass(frozen=True)
class AckToken:
    """Placeholder for one dispatched query message, matched by its ack.

    ``seq`` distinguishes repeated dispatches on the same (qid, from, to)
    triple within one query.
    """

    qid: int
    from_sg: int
    to_sg: int
    seq: int


@dataclass(frozen=True)
class QueryMessage:
    """Expansion request: explore from the given border vertices.

    ``entries`` is non-empty; each vertex must be internal to the destination
    subgraph (the query vertex itself for the root dispatch). The record
    carries its own token coordinates so the receiver can acknowledge it.
    """

    qid: int
    entries: tuple[tuple[int, float], ...]  # (vertex, distance from query vertex)
    from_sg: int                            # COORDINATOR for the root dispatch
    to_sg: int
    seq: int
    snapshot_version: int

    def token(self) -> AckToken:
        return AckToken(self.qid, self.from_sg, self.to_sg, self.seq)


@dataclass(frozen=True)
class EpsUpdate:
    """New query upper bound for one subgraph; value 0 is the kill signal."""

    qid: int
    value: float


@dataclass(frozen=True)
class WorkerReport:
    """Everything a worker tells the coordinator about one processed message.

    Candidates, dispatch notices for the messages sent during the pass, and
    the acknowledgment for the inbound message travel together so the
    coordinator applies them atomically; delivering them separately under
    unordered delivery would let an ack overtake its sibling notices and
    terminate a query early.
    """

    qid: int
    candidates: tuple[tuple[int, float], ...]  # (object id, distance)
    notices: tuple[AckToken, ...]
    ack: AckToken


@dataclass(frozen=True)
class QuerySubmit:
    qid: int
    v_q: int
    k: int


# mailbox priority bands: coordinator-bound reports first, bound updates
# next, expansion messages last -- control traffic outruns exploration
_BANDS = {WorkerReport: 0, QuerySubmit: 0, EpsUpdate: 1, QueryMessage: 2}


@dataclass
class Envelope:
    seq: int
    src: int            # subgraph id or COORDINATOR
    dst: int            # subgraph id or COORDINATOR
    payload: object
    band: int = field(init=False)

    def __post_init__(self):
        self.band = _BANDS[type(self.payload)]

    @property
    def kind(self) -> str:
        return type(self.payload).__name__
