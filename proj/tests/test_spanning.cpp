#include <doctest.h>

#include <map>
#include <optional>

#include "congest/phase1.hpp"
#include "congest/spanning.hpp"

using namespace congest;

namespace {
Sim make_sim(WeightedGraph& g) {
    SolverConfig cfg;
    cfg.assert_level = AssertLevel::Off;
    return Sim(g, cfg);
}
} // namespace

TEST_CASE("BFS over P5 from an endpoint") {
    WeightedGraph g = generate_graph(GraphFamily::Path, 5, 1);
    Sim sim = make_sim(g);
    build_bfs_tree(sim);
    CHECK(sim.glob.d_t == 4);
    for (VertexId v = 0; v < 5; ++v) {
        CHECK(sim.st[v].tree_depth == 4);
        CHECK(sim.st[v].joined);
    }
    // path vertices are numbered 0..4 along the path
    for (VertexId v = 0; v < 5; ++v) CHECK(sim.st[v].depth == v);
}

TEST_CASE("BFS over a star rooted at the hub") {
    WeightedGraph g = generate_graph(GraphFamily::Star, 5, 1);
    Sim sim = make_sim(g);
    build_bfs_tree(sim);
    CHECK(sim.glob.d_t == 1);
    CHECK(sim.st[0].child_count == 4);
    for (VertexId v = 1; v < 5; ++v) CHECK(sim.st[v].depth == 1);
}

TEST_CASE("BFS depths match the centralized oracle") {
    WeightedGraph g = generate_graph(GraphFamily::RandomConnected, 64, 1);
    Sim sim = make_sim(g);
    build_bfs_tree(sim);
    auto want = oracle_bfs_depths(g, 0);
    std::uint32_t want_depth = 0;
    for (VertexId v = 0; v < 64; ++v) {
        CHECK(sim.st[v].depth == want[v]);
        want_depth = std::max(want_depth, want[v]);
    }
    CHECK(sim.glob.d_t == want_depth);
}

TEST_CASE("BFS on a single vertex") {
    WeightedGraph g = generate_graph(GraphFamily::Path, 1, 1);
    Sim sim = make_sim(g);
    build_bfs_tree(sim);
    CHECK(sim.glob.d_t == 0);
    CHECK(sim.st[0].child_count == 0);
}

TEST_CASE("BFS parent choice prefers the lowest port") {
    // C4: vertex 2 hears joins from 1 and 3 in the same round
    WeightedGraph g = generate_graph(GraphFamily::Cycle, 4, 2);
    Sim sim = make_sim(g);
    build_bfs_tree(sim);
    CHECK(sim.glob.d_t == 2);
    auto d = oracle_bfs_depths(g, 0);
    for (VertexId v = 0; v < 4; ++v) CHECK(sim.st[v].depth == d[v]);
}

namespace {
// P5 as one fragment tree rooted at the middle vertex
Sim middle_rooted_fragment(WeightedGraph& g) {
    SolverConfig cfg;
    cfg.assert_level = AssertLevel::Off;
    Sim sim(g, cfg);
    build_bfs_tree(sim);
    sim.stage = Stage::Phase1;
    // path 0-1-2-3-4, fragment tree rooted at 2
    auto port_to = [&](VertexId v, VertexId u) {
        for (PortId p = 0; p < g.degree(v); ++p)
            if (g.neighbor(v, p) == u) return p;
        return kNoPort;
    };
    std::vector<VertexId> parent = {1, 2, kNoVertex, 2, 3};
    for (VertexId v = 0; v < 5; ++v) {
        SolVertex& s = sim.st[v];
        s.frag_id = 3;
        s.base_id = 3;
        s.frag_parent_port = parent[v] == kNoVertex ? kNoPort : port_to(v, parent[v]);
        s.base_parent_port = s.frag_parent_port;
        std::uint32_t kids = 0;
        for (VertexId u = 0; u < 5; ++u)
            if (parent[u] == v) ++kids;
        s.frag_child_count = kids;
        s.base_child_count = kids;
        s.base_root = v == 2;
        account(sim, v);
    }
    return sim;
}
} // namespace

TEST_CASE("tree broadcast from the middle of P5 finishes two rounds after the pins") {
    WeightedGraph g = generate_graph(GraphFamily::Path, 5, 1);
    Sim sim = middle_rooted_fragment(g);
    std::vector<std::uint64_t> got(5, 0);
    PhaseStats stats = tree_broadcast(
        sim, TreeView::Fragment,
        [&](VertexId v) -> std::optional<std::uint64_t> {
            if (v == 2) return 42;
            return std::nullopt;
        },
        [&](VertexId v, std::uint64_t x) { got[v] = x; });
    for (VertexId v = 0; v < 5; ++v) CHECK(got[v] == 42);
    CHECK(stats.macro_rounds == 3); // one pre-round of pins, two rounds of flooding
}

TEST_CASE("tree broadcast on a single-vertex tree sends nothing") {
    WeightedGraph g = generate_graph(GraphFamily::Path, 1, 1);
    SolverConfig cfg;
    cfg.assert_level = AssertLevel::Off;
    Sim sim(g, cfg);
    build_bfs_tree(sim);
    sim.st[0].frag_id = 1;
    sim.st[0].base_id = 1;
    sim.st[0].base_root = true;
    bool seen = false;
    PhaseStats stats = tree_broadcast(
        sim, TreeView::Fragment,
        [&](VertexId) -> std::optional<std::uint64_t> { return 9; },
        [&](VertexId, std::uint64_t x) { seen = x == 9; });
    CHECK(seen);
    CHECK(stats.frames == 0);
}

TEST_CASE("simultaneous broadcasts stay within their own fragments") {
    WeightedGraph g = generate_graph(GraphFamily::Path, 4, 1);
    SolverConfig cfg;
    cfg.assert_level = AssertLevel::Off;
    Sim sim(g, cfg);
    build_bfs_tree(sim);
    sim.stage = Stage::Phase1;
    // fragments {0,1} rooted at 0 and {2,3} rooted at 2
    for (VertexId v = 0; v < 4; ++v) {
        SolVertex& s = sim.st[v];
        s.frag_id = v < 2 ? 1 : 3;
        bool root = v == 0 || v == 2;
        s.frag_parent_port = root ? kNoPort : sim.st[v].parent_port;
        s.frag_child_count = root ? 1 : 0;
        account(sim, v);
    }
    std::vector<std::uint64_t> got(4, 0);
    tree_broadcast(
        sim, TreeView::Fragment,
        [&](VertexId v) -> std::optional<std::uint64_t> {
            if (v == 0) return 100;
            if (v == 2) return 300;
            return std::nullopt;
        },
        [&](VertexId v, std::uint64_t x) { got[v] = x; });
    CHECK(got[0] == 100);
    CHECK(got[1] == 100);
    CHECK(got[2] == 300);
    CHECK(got[3] == 300);
}

TEST_CASE("tree convergecast sums over P5") {
    WeightedGraph g = generate_graph(GraphFamily::Path, 5, 1);
    Sim sim = middle_rooted_fragment(g);
    std::uint64_t at_root = 0;
    tree_convergecast(
        sim, TreeView::Fragment, Agg::Sum2,
        [&](VertexId) { return CycleValue{1, 0, true}; },
        [&](VertexId root, const CycleValue& val) {
            CHECK(root == 2);
            at_root = val.x;
        });
    CHECK(at_root == 5);
}

TEST_CASE("tree convergecast min with retrace on a star") {
    WeightedGraph g = generate_graph(GraphFamily::Star, 5, 1);
    SolverConfig cfg;
    cfg.assert_level = AssertLevel::Off;
    Sim sim(g, cfg);
    build_bfs_tree(sim);
    sim.stage = Stage::Phase1;
    std::vector<std::uint64_t> inputs = {8, 7, 3, 9, 5};
    for (VertexId v = 0; v < 5; ++v) {
        SolVertex& s = sim.st[v];
        s.frag_id = 1;
        s.frag_parent_port = v == 0 ? kNoPort : sim.st[v].parent_port;
        s.frag_child_count = v == 0 ? 4 : 0;
        account(sim, v);
    }
    std::uint64_t at_root = 0;
    tree_convergecast(
        sim, TreeView::Fragment, Agg::MinPair,
        [&](VertexId v) { return CycleValue{inputs[v], 0, true}; },
        [&](VertexId root, const CycleValue& val) {
            CHECK(root == 0);
            at_root = val.x;
        });
    CHECK(at_root == 3);
    // the retrace port at the hub points toward the vertex holding 3
    CHECK(g.neighbor(0, sim.st[0].retrace_port) == 2);
}

TEST_CASE("base-tree convergecast minima match a centralized scan") {
    WeightedGraph g = generate_graph(GraphFamily::RandomConnected, 64, 1, 2);
    SolverConfig cfg;
    cfg.assert_level = AssertLevel::Off;
    Sim sim(g, cfg);
    build_bfs_tree(sim);
    form_base_fragments(sim);
    std::map<std::uint64_t, std::uint64_t> got, want;
    tree_convergecast(
        sim, TreeView::Base, Agg::MinPair,
        [&](VertexId v) { return CycleValue{v * 13 % 101, 0, true}; },
        [&](VertexId root, const CycleValue& val) { got[sim.st[root].base_id] = val.x; });
    for (VertexId v = 0; v < 64; ++v) {
        auto it = want.find(sim.st[v].base_id);
        std::uint64_t x = v * 13 % 101;
        if (it == want.end() || x < it->second) want[sim.st[v].base_id] = x;
    }
    CHECK(got == want);
}
