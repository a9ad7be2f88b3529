"""Distance-preserving graph simplification through gate vertices and gate graphs."""

from .errors import GateSimpError, GraphParseError, InfeasibleCoverError, ResourceGuardError
from .gategraph import (GateQueryIndex, QueryResult, RouteKind, WeightedGraph, build_local_gate_graph,
                        gate_dijkstra, query_distance, sparsify)
from .gates import GateVertexSet, Method, discover, discover_exact, discover_fs, discover_kskip, discover_sc
from .graph import (UNREACHABLE, DistanceOracle, Graph, GraphStats, apsp_oracle, bounded_bfs, complete_graph,
                    cycle_graph, from_edges, gen_er, gen_scale_free, generate, graph_stats, load_edge_list,
                    path_graph, star_graph)
from .setcover import (CoverInstance, GreedyTrace, Mode, build_instance_bfs, build_instance_oracle, exact_solve,
                       greedy_solve, pair_key)
from .verify import (ChainReport, VerificationReport, approx_report, check_chain, check_gate_cover,
                     check_kskip_cover, check_recovery, check_sparsify_preserves, check_sparsify_tight)

__version__ = "0.1.0"
