#include "congest/graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace congest {

WeightedGraph::WeightedGraph(std::uint32_t n,
                             std::vector<std::pair<std::pair<VertexId, VertexId>, std::uint64_t>> edge_list)
    : n_(n) {
    if (n == 0) throw InputError("graph must have at least one vertex");
    adj_.resize(n);
    edges_.reserve(edge_list.size());
    std::set<std::uint64_t> seen_weights;
    std::set<std::pair<VertexId, VertexId>> seen_edges;
    for (auto& [uv, w] : edge_list) {
        auto [u, v] = uv;
        if (u >= n || v >= n) throw InputError("edge endpoint out of range");
        if (u == v) throw InputError("self-loops are not allowed");
        if (!seen_weights.insert(w).second) throw InputError("duplicate weight " + std::to_string(w));
        auto key = std::minmax(u, v);
        if (!seen_edges.insert({key.first, key.second}).second) throw InputError("parallel edge");
        edges_.push_back(EdgeRec{u, v, w, 0});
    }
    // ranks: 1..m by increasing weight
    std::vector<std::uint32_t> order(edges_.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::uint32_t a, std::uint32_t b) { return edges_[a].weight < edges_[b].weight; });
    for (std::uint32_t i = 0; i < order.size(); ++i) edges_[order[i]].rank = i + 1;
    for (std::uint32_t i = 0; i < edges_.size(); ++i) {
        adj_[edges_[i].u].push_back(PortEntry{edges_[i].v, i});
        adj_[edges_[i].v].push_back(PortEntry{edges_[i].u, i});
    }
}

PortId WeightedGraph::reverse_port(VertexId v, PortId p) const {
    std::uint32_t e = adj_[v][p].edge_index;
    VertexId u = adj_[v][p].neighbor;
    for (PortId q = 0; q < adj_[u].size(); ++q)
        if (adj_[u][q].edge_index == e) return q;
    throw ProtocolFault("port lists inconsistent");
}

bool WeightedGraph::is_connected() const {
    auto depths = oracle_bfs_depths(*this, 0);
    for (auto d : depths)
        if (d == std::numeric_limits<std::uint32_t>::max()) return false;
    return true;
}

GraphFamily parse_family(const std::string& name) {
    if (name == "path") return GraphFamily::Path;
    if (name == "cycle") return GraphFamily::Cycle;
    if (name == "star") return GraphFamily::Star;
    if (name == "random" || name == "random-connected") return GraphFamily::RandomConnected;
    if (name == "grid") return GraphFamily::Grid;
    throw InputError("unsupported graph family: " + name);
}

WeightedGraph generate_graph(GraphFamily family, std::uint32_t n, std::uint64_t seed,
                             std::uint32_t extra_degree) {
    if (n < 1) throw InputError("n must be >= 1");
    std::vector<std::pair<VertexId, VertexId>> ends;
    Rng rng(seed * 0x100000001b3ULL + 7);
    auto add = [&](VertexId u, VertexId v) { ends.push_back({u, v}); };
    switch (family) {
    case GraphFamily::Path:
        for (VertexId i = 0; i + 1 < n; ++i) add(i, i + 1);
        break;
    case GraphFamily::Cycle:
        if (n < 3) throw InputError("cycle needs n >= 3");
        for (VertexId i = 0; i + 1 < n; ++i) add(i, i + 1);
        add(n - 1, 0);
        break;
    case GraphFamily::Star:
        for (VertexId i = 1; i < n; ++i) add(0, i);
        break;
    case GraphFamily::Grid: {
        std::uint32_t side = static_cast<std::uint32_t>(isqrt_floor(n));
        if (side * side != n) throw InputError("grid needs a square n");
        auto at = [&](std::uint32_t r, std::uint32_t c) { return r * side + c; };
        for (std::uint32_t r = 0; r < side; ++r)
            for (std::uint32_t c = 0; c < side; ++c) {
                if (c + 1 < side) add(at(r, c), at(r, c + 1));
                if (r + 1 < side) add(at(r, c), at(r + 1, c));
            }
        break;
    }
    case GraphFamily::RandomConnected: {
        // random spanning tree by attaching each vertex to a random earlier one,
        // then extra random edges
        std::vector<VertexId> order(n);
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(order);
        std::set<std::pair<VertexId, VertexId>> used;
        for (std::uint32_t i = 1; i < n; ++i) {
            VertexId u = order[i];
            VertexId v = order[rng.below(i)];
            auto key = std::minmax(u, v);
            used.insert({key.first, key.second});
            add(u, v);
        }
        std::uint64_t max_edges = static_cast<std::uint64_t>(n) * (n - 1) / 2;
        std::uint64_t want = std::min<std::uint64_t>(max_edges, (n - 1) + static_cast<std::uint64_t>(extra_degree) * n / 2);
        std::uint64_t attempts = 0;
        while (used.size() < want && attempts < 64 * want + 64) {
            ++attempts;
            VertexId u = static_cast<VertexId>(rng.below(n));
            VertexId v = static_cast<VertexId>(rng.below(n));
            if (u == v) continue;
            auto key = std::minmax(u, v);
            if (used.insert({key.first, key.second}).second) add(u, v);
        }
        break;
    }
    }
    // weights: random permutation of 1..m
    std::vector<std::uint64_t> weights(ends.size());
    std::iota(weights.begin(), weights.end(), 1);
    rng.shuffle(weights);
    std::vector<std::pair<std::pair<VertexId, VertexId>, std::uint64_t>> list;
    list.reserve(ends.size());
    for (std::size_t i = 0; i < ends.size(); ++i) list.push_back({ends[i], weights[i]});
    return WeightedGraph(n, std::move(list));
}

WeightedGraph load_graph(const std::string& path, bool require_connected) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open graph file: " + path);
    std::string line;
    std::uint32_t n = 0, m = 0;
    bool have_header = false;
    std::vector<std::pair<std::pair<VertexId, VertexId>, std::uint64_t>> list;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        std::string first;
        if (!(ss >> first)) continue;
        if (first[0] == '#') continue;
        std::istringstream row(line);
        if (!have_header) {
            if (!(row >> n >> m)) throw InputError("malformed header at line " + std::to_string(lineno));
            have_header = true;
            continue;
        }
        std::uint64_t u, v, w;
        if (!(row >> u >> v >> w))
            throw InputError("malformed edge at line " + std::to_string(lineno));
        if (u < 1 || v < 1) throw InputError("vertex ids are 1-based, line " + std::to_string(lineno));
        list.push_back({{static_cast<VertexId>(u - 1), static_cast<VertexId>(v - 1)}, w});
    }
    if (!have_header) throw InputError("empty graph file: " + path);
    if (list.size() != m)
        throw InputError("edge count mismatch: header says " + std::to_string(m) + ", got " +
                         std::to_string(list.size()));
    WeightedGraph g(n, std::move(list));
    if (require_connected && !g.is_connected()) throw InputError("graph is disconnected");
    return g;
}

void write_graph(const WeightedGraph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open output file: " + path);
    out << g.vertex_count() << " " << g.edge_count() << "\n";
    for (const auto& e : g.edges()) out << (e.u + 1) << " " << (e.v + 1) << " " << e.weight << "\n";
}

Partition load_partition(const std::string& path, const WeightedGraph& g) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open partition file: " + path);
    Partition p;
    p.part_of.assign(g.vertex_count(), std::numeric_limits<std::uint32_t>::max());
    std::uint64_t v, id;
    while (in >> v >> id) {
        if (v < 1 || v > g.vertex_count()) throw InputError("partition vertex out of range");
        p.part_of[v - 1] = static_cast<std::uint32_t>(id);
    }
    std::set<std::uint32_t> ids;
    for (auto x : p.part_of) {
        if (x == std::numeric_limits<std::uint32_t>::max()) throw InputError("partition does not cover all vertices");
        ids.insert(x);
    }
    p.part_count = static_cast<std::uint32_t>(ids.size());
    validate_partition(g, p);
    return p;
}

void write_partition(const Partition& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open output file: " + path);
    for (std::size_t v = 0; v < p.part_of.size(); ++v) out << (v + 1) << " " << p.part_of[v] << "\n";
}

Partition generate_partition(const WeightedGraph& g, std::uint32_t parts, std::uint64_t seed) {
    std::uint32_t n = g.vertex_count();
    if (parts < 1 || parts > n) throw InputError("bad part count");
    Rng rng(seed ^ 0xabcdef12345ULL);
    Partition p;
    p.part_of.assign(n, std::numeric_limits<std::uint32_t>::max());
    p.part_count = parts;
    // distinct seeds, then round-robin BFS growth keeps each part connected
    std::vector<VertexId> seeds;
    std::vector<VertexId> pool(n);
    std::iota(pool.begin(), pool.end(), 0);
    rng.shuffle(pool);
    std::vector<std::deque<VertexId>> frontier(parts);
    for (std::uint32_t i = 0; i < parts; ++i) {
        p.part_of[pool[i]] = i;
        frontier[i].push_back(pool[i]);
    }
    std::uint32_t assigned = parts;
    while (assigned < n) {
        bool progress = false;
        for (std::uint32_t i = 0; i < parts && assigned < n; ++i) {
            while (!frontier[i].empty()) {
                VertexId v = frontier[i].front();
                VertexId grab = kNoVertex;
                for (const auto& pe : g.ports(v)) {
                    if (p.part_of[pe.neighbor] == std::numeric_limits<std::uint32_t>::max()) {
                        grab = pe.neighbor;
                        break;
                    }
                }
                if (grab == kNoVertex) {
                    frontier[i].pop_front();
                    continue;
                }
                p.part_of[grab] = i;
                frontier[i].push_back(grab);
                ++assigned;
                progress = true;
                break;
            }
        }
        if (!progress) throw InputError("partition growth stuck (disconnected graph?)");
    }
    validate_partition(g, p);
    return p;
}

void validate_partition(const WeightedGraph& g, const Partition& p) {
    if (p.part_of.size() != g.vertex_count()) throw InputError("partition size mismatch");
    // each part must induce a connected subgraph
    std::uint32_t n = g.vertex_count();
    std::vector<bool> visited(n, false);
    for (VertexId s = 0; s < n; ++s) {
        if (visited[s]) continue;
        std::uint32_t part = p.part_of[s];
        std::deque<VertexId> q{s};
        visited[s] = true;
        while (!q.empty()) {
            VertexId v = q.front();
            q.pop_front();
            for (const auto& pe : g.ports(v)) {
                if (!visited[pe.neighbor] && p.part_of[pe.neighbor] == part) {
                    visited[pe.neighbor] = true;
                    q.push_back(pe.neighbor);
                }
            }
        }
        // any later vertex of the same part that was not reached means the part is disconnected
        for (VertexId v = s + 1; v < n; ++v)
            if (p.part_of[v] == part && !visited[v]) throw InputError("disconnected part " + std::to_string(part));
    }
}

SubgraphMask induced_mask(const WeightedGraph& g, const Partition& p) {
    validate_partition(g, p);
    SubgraphMask mask;
    mask.edge_in_h.assign(g.edge_count(), false);
    mask.recorded_by.resize(g.vertex_count());
    for (VertexId v = 0; v < g.vertex_count(); ++v)
        mask.recorded_by[v].assign(g.degree(v), false);
    for (std::uint32_t i = 0; i < g.edge_count(); ++i) {
        const auto& e = g.edge(i);
        if (p.part_of[e.u] == p.part_of[e.v]) {
            mask.edge_in_h[i] = true;
            VertexId rec = std::min(e.u, e.v); // exactly one endpoint records e
            for (PortId q = 0; q < g.degree(rec); ++q)
                if (g.edge_at(rec, q) == i) mask.recorded_by[rec][q] = true;
        }
    }
    return mask;
}

namespace {
struct Dsu {
    std::vector<std::uint32_t> parent;
    explicit Dsu(std::uint32_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::uint32_t find(std::uint32_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[a] = b;
        return true;
    }
};
} // namespace

std::vector<std::uint32_t> oracle_msf(const WeightedGraph& g, const SubgraphMask* mask) {
    std::vector<std::uint32_t> order;
    order.reserve(g.edge_count());
    for (std::uint32_t i = 0; i < g.edge_count(); ++i)
        if (!mask || mask->in_h(i)) order.push_back(i);
    std::sort(order.begin(), order.end(),
              [&](std::uint32_t a, std::uint32_t b) { return g.edge(a).weight < g.edge(b).weight; });
    Dsu dsu(g.vertex_count());
    std::vector<std::uint32_t> out;
    for (auto i : order)
        if (dsu.unite(g.edge(i).u, g.edge(i).v)) out.push_back(i);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::uint32_t> oracle_bfs_depths(const WeightedGraph& g, VertexId root) {
    std::vector<std::uint32_t> depth(g.vertex_count(), std::numeric_limits<std::uint32_t>::max());
    std::deque<VertexId> q{root};
    depth[root] = 0;
    while (!q.empty()) {
        VertexId v = q.front();
        q.pop_front();
        for (const auto& pe : g.ports(v)) {
            if (depth[pe.neighbor] == std::numeric_limits<std::uint32_t>::max()) {
                depth[pe.neighbor] = depth[v] + 1;
                q.push_back(pe.neighbor);
            }
        }
    }
    return depth;
}

GraphStats oracle_stats(const WeightedGraph& g, VertexId root) {
    GraphStats st;
    st.n = g.vertex_count();
    st.m = g.edge_count();
    auto d0 = oracle_bfs_depths(g, root);
    for (auto d : d0)
        if (d != std::numeric_limits<std::uint32_t>::max()) st.bfs_depth = std::max(st.bfs_depth, d);
    // diameter by BFS from every vertex; oracle-side, small inputs only
    if (g.vertex_count() <= 4096) {
        for (VertexId v = 0; v < g.vertex_count(); ++v) {
            auto dv = oracle_bfs_depths(g, v);
            for (auto d : dv)
                if (d != std::numeric_limits<std::uint32_t>::max()) st.diameter = std::max(st.diameter, d);
        }
    }
    return st;
}

} // namespace congest
