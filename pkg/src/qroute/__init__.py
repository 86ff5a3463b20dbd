"""Decoupled distributed graph querying with cache-aware query routing.

Query processors are separated from graph storage; the router picks a
processor per query using one of five strategies (next-ready, hash,
landmark, embed, no-cache) and steals queued work for idle processors.
The landmark and embed strategies route nearby query nodes to the same
processor so h-hop neighborhoods overlap in its cache.
"""

from .errors import (
    ConfigurationError,
    EmbeddingError,
    NotFoundError,
    OptimizerError,
    ParseError,
    PreconditionError,
    QRouteError,
    TransportError,
)
from .graph import AddEdge, AddNode, AdjacencyEntry, Graph, RemoveEdge, RemoveNode, load_edge_list
from .harness import ExperimentConfig, RunMetrics, Runtime, prepare_runtime, run_experiment, sweep
from .queries import Query, QueryKind, QueryResult
from .router import RouterConfig, Strategy
from .workload import WorkloadSpec, generate_workload

__version__ = "0.1.0"

__all__ = [
    "AddEdge",
    "AddNode",
    "AdjacencyEntry",
    "ConfigurationError",
    "EmbeddingError",
    "ExperimentConfig",
    "Graph",
    "NotFoundError",
    "OptimizerError",
    "ParseError",
    "PreconditionError",
    "QRouteError",
    "Query",
    "QueryKind",
    "QueryResult",
    "RemoveEdge",
    "RemoveNode",
    "RouterConfig",
    "RunMetrics",
    "Runtime",
    "Strategy",
    "TransportError",
    "WorkloadSpec",
    "generate_workload",
    "load_edge_list",
    "prepare_runtime",
    "run_experiment",
    "sweep",
    "__version__",
]
