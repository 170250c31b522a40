"""Connectivity oracles for graphs under batched vertex or edge failures."""

from .graph_core import Graph, connected_bfs, component_labels, generate_graph, load_graph
from .hierarchy import build_hierarchy
from .det_oracle import CapacityError, DetOracle
from .mc_vertex_oracle import MCVertexOracle
from .mc_edge_oracle import MCEdgeOracle

__all__ = [
    "Graph", "connected_bfs", "component_labels", "generate_graph", "load_graph",
    "build_hierarchy", "CapacityError", "DetOracle", "MCVertexOracle", "MCEdgeOracle",
]
__version__ = "0.1.0"
