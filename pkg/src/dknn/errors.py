"""Exception types shared across the package."""


class DknnError(Exception):
    """Base class for all package errors."""


class GraphFormatError(DknnError):
    """A graph/coordinate/update file could not be parsed."""

    def __init__(self, path: str, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = path
        self.line_no = line_no


class GraphValidationError(DknnError):
    """Parsed input violates a graph invariant (missing coordinate, negative weight, ...)."""


class UpdateError(DknnError):
    """A weight-update batch referenced unknown edges; nothing was applied."""

    def __init__(self, offenders: list[tuple[int, int]]):
        shown = ", ".join(f"({u},{v})" for u, v in offenders[:10])
        more = "" if len(offenders) <= 10 else f" and {len(offenders) - 10} more"
        super().__init__(f"updates reference unknown edges: {shown}{more}")
        self.offenders = offenders


class PartitionError(DknnError):
    """Invalid partition request or partition file."""


class ObjectError(DknnError):
    """Invalid moving-object operation."""


class QueryError(DknnError):
    """Invalid query submission (bad k, duplicate qid, unknown vertex)."""


class ContractViolation(DknnError):
    """An API precondition owned by the runtime was broken (e.g. snapshot advance mid-query)."""


class ProtocolViolation(DknnError):
    """The termination watchdog fired: mailboxes drained with unfinished queries."""

    def __init__(self, message: str, dump: str = ""):
        super().__init__(message if not dump else f"{message}\n{dump}")
        self.dump = dump
