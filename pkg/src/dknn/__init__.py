"""Distributed, index-free kNN queries over moving objects on dynamic road networks.

The library splits a weighted road network into subgraphs, explores them
with per-subgraph Dijkstra workers exchanging border-vertex distances, and
coordinates results, Euclidean pruning, and termination detection centrally.
Centralized oracles (incremental network expansion and brute force) provide
ground truth for differential testing.
"""

from .coordinator import Coordinator, Mode, QueryMetrics, QueryResult
from .errors import (
    ContractViolation,
    DknnError,
    GraphFormatError,
    GraphValidationError,
    ObjectError,
    PartitionError,
    ProtocolViolation,
    QueryError,
    UpdateError,
)
from .graph import (
    GraphSnapshot,
    WeightUpdate,
    apply_updates,
    build_snapshot,
    euclid_lower_bound,
    load_dimacs,
    read_update_stream,
    write_update_stream,
)
from .messages import AckToken, EpsUpdate, QueryMessage, WorkerReport
from .objects import (
    MovingObject,
    ObjectStore,
    generate_objects,
    object_distance,
    read_objects,
    write_objects,
)
from .oracle import OracleResult, brute_knn, dijkstra_sssp, ine_knn
from .partition import (
    PartitionMap,
    SubgraphTopology,
    Topology,
    derive_topology,
    export_partition,
    import_partition,
    partition_rcb,
    topology_report,
)
from .runtime import BatchResult, RuntimeConfig, System, spawn_topology
from .worker import Worker

__version__ = "0.1.0"

__all__ = [
    "AckToken",
    "BatchResult",
    "ContractViolation",
    "Coordinator",
    "DknnError",
    "EpsUpdate",
    "GraphFormatError",
    "GraphSnapshot",
    "GraphValidationError",
    "Mode",
    "MovingObject",
    "ObjectError",
    "ObjectStore",
    "OracleResult",
    "PartitionError",
    "PartitionMap",
    "ProtocolViolation",
    "QueryError",
    "QueryMessage",
    "QueryMetrics",
    "QueryResult",
    "RuntimeConfig",
    "SubgraphTopology",
    "System",
    "Topology",
    "UpdateError",
    "WeightUpdate",
    "Worker",
    "WorkerReport",
    "apply_updates",
    "brute_knn",
    "build_snapshot",
    "derive_topology",
    "dijkstra_sssp",
    "euclid_lower_bound",
    "export_partition",
    "generate_objects",
    "import_partition",
    "ine_knn",
    "load_dimacs",
    "object_distance",
    "partition_rcb",
    "read_objects",
    "read_update_stream",
    "spawn_topology",
    "topology_report",
    "write_objects",
    "write_update_stream",
]
