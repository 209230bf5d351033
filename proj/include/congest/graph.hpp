#ifndef CONGEST_GRAPH_HPP
#define CONGEST_GRAPH_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "congest/common.hpp"

namespace congest {

// One entry of a vertex's read-only port list.
struct PortEntry {
    VertexId neighbor;
    std::uint32_t edge_index; // index into WeightedGraph::edges
};

struct EdgeRec {
    VertexId u;
    VertexId v;
    std::uint64_t weight; // original weight, pairwise distinct
    WeightRank rank;      // 1..m, order-isomorphic to weight; protocol traffic uses this
};

// Immutable edge-weighted input graph. Port lists are the only adjacency
// the simulated vertices may read (read-only, uncharged).
class WeightedGraph {
public:
    WeightedGraph(std::uint32_t n, std::vector<std::pair<std::pair<VertexId, VertexId>, std::uint64_t>> edge_list);

    std::uint32_t vertex_count() const { return n_; }
    std::uint32_t edge_count() const { return static_cast<std::uint32_t>(edges_.size()); }
    const std::vector<EdgeRec>& edges() const { return edges_; }
    const EdgeRec& edge(std::uint32_t idx) const { return edges_[idx]; }
    const std::vector<PortEntry>& ports(VertexId v) const { return adj_[v]; }
    std::uint32_t degree(VertexId v) const { return static_cast<std::uint32_t>(adj_[v].size()); }
    VertexId neighbor(VertexId v, PortId p) const { return adj_[v][p].neighbor; }
    std::uint32_t edge_at(VertexId v, PortId p) const { return adj_[v][p].edge_index; }
    WeightRank rank_at(VertexId v, PortId p) const { return edges_[adj_[v][p].edge_index].rank; }
    // the port on the far endpoint that leads back over the same edge
    PortId reverse_port(VertexId v, PortId p) const;

    bool is_connected() const;

private:
    std::uint32_t n_;
    std::vector<EdgeRec> edges_;
    std::vector<std::vector<PortEntry>> adj_;
};

// Vertex partition; every part must induce a connected subgraph.
struct Partition {
    std::vector<std::uint32_t> part_of; // per vertex
    std::uint32_t part_count = 0;
};

// Distributed mask over edges: for each masked-in edge exactly one endpoint
// (the smaller vertex id) records it. w_H is "absent" for masked-out edges.
struct SubgraphMask {
    std::vector<bool> edge_in_h;                 // centralized view, indexed by edge
    std::vector<std::vector<bool>> recorded_by;  // recorded_by[v][port]: v stores this edge's membership

    bool in_h(std::uint32_t edge_index) const { return edge_in_h[edge_index]; }
};

struct GraphStats {
    std::uint32_t n = 0;
    std::uint32_t m = 0;
    std::uint32_t diameter = 0;  // unweighted, oracle-side only
    std::uint32_t bfs_depth = 0; // d(T) from the chosen root
};

enum class GraphFamily { Path, Cycle, Star, RandomConnected, Grid };

GraphFamily parse_family(const std::string& name);

// Deterministic generator; weights are a random permutation of 1..m.
// `extra_degree` only affects random-connected (average extra edges per vertex).
WeightedGraph generate_graph(GraphFamily family, std::uint32_t n, std::uint64_t seed,
                             std::uint32_t extra_degree = 3);

WeightedGraph load_graph(const std::string& path, bool require_connected = true);
void write_graph(const WeightedGraph& g, const std::string& path);

Partition load_partition(const std::string& path, const WeightedGraph& g);
void write_partition(const Partition& p, const std::string& path);
// Random partition into `parts` connected pieces (BFS growth from seeds).
Partition generate_partition(const WeightedGraph& g, std::uint32_t parts, std::uint64_t seed);
void validate_partition(const WeightedGraph& g, const Partition& p);

// e = (u,v) is in H iff both endpoints share a part.
SubgraphMask induced_mask(const WeightedGraph& g, const Partition& p);

// ---- centralized oracles (tests and assert-mode only) ----

// Unique minimum spanning forest (Kruskal) under w, or w_H when mask given.
std::vector<std::uint32_t> oracle_msf(const WeightedGraph& g, const SubgraphMask* mask = nullptr);

// Layered BFS from root with lowest-port-index parent rule; returns depths
// (kNoValue-like UINT32_MAX for unreachable) and fills stats.
std::vector<std::uint32_t> oracle_bfs_depths(const WeightedGraph& g, VertexId root);

GraphStats oracle_stats(const WeightedGraph& g, VertexId root);

} // namespace congest

#endif
