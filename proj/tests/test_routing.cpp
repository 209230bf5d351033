#include <doctest.h>

#include "congest/routing.hpp"
#include "congest/spanning.hpp"

using namespace congest;

namespace {
Sim setup(WeightedGraph& g) {
    SolverConfig cfg;
    cfg.assert_level = AssertLevel::Off;
    Sim sim(g, cfg);
    build_bfs_tree(sim);
    setup_routing(sim);
    return sim;
}

// drive the pure forwarding rule from the root; returns hop count
std::uint32_t route_from_root(const Sim& sim, VertexId dest) {
    VertexId cur = sim.glob.root;
    std::uint32_t hops = 0;
    while (true) {
        RouteDecision rd = route_next_hop(sim.st[cur].table, sim.st[dest].self_label);
        if (rd.deliver) {
            CHECK(cur == dest);
            return hops;
        }
        cur = sim.g.neighbor(cur, rd.forward_port);
        ++hops;
        REQUIRE(hops <= sim.glob.n);
    }
}
} // namespace

TEST_CASE("P5 labels are all-heavy: empty light-edge lists") {
    WeightedGraph g = generate_graph(GraphFamily::Path, 5, 1);
    Sim sim = setup(g);
    for (VertexId v = 0; v < 5; ++v) CHECK(sim.st[v].self_label.light_edges.empty());
    CHECK(route_from_root(sim, 4) == 4); // heavy-child forwards all the way down
}

TEST_CASE("star leaves carry exactly one light edge") {
    WeightedGraph g = generate_graph(GraphFamily::Star, 5, 1);
    Sim sim = setup(g);
    CHECK(sim.st[0].self_label.light_edges.empty());
    CHECK(sim.st[0].self_label.dfs_number == 1);
    for (VertexId v = 1; v < 5; ++v) {
        CHECK(sim.st[v].self_label.light_edges.size() == 1);
        CHECK(route_from_root(sim, v) == 1);
    }
}

TEST_CASE("destination equal to self delivers immediately") {
    WeightedGraph g = generate_graph(GraphFamily::Path, 3, 1);
    Sim sim = setup(g);
    RouteDecision rd = route_next_hop(sim.st[1].table, sim.st[1].self_label);
    CHECK(rd.deliver);
}

TEST_CASE("routing completeness: every vertex reached in exactly depth hops") {
    for (std::uint64_t seed : {1ull, 2ull}) {
        WeightedGraph g = generate_graph(GraphFamily::RandomConnected, 64, seed);
        Sim sim = setup(g);
        for (VertexId v = 0; v < 64; ++v) CHECK(route_from_root(sim, v) == sim.st[v].depth);
    }
}

TEST_CASE("label and table widths stay within their caps") {
    for (std::uint32_t n : {64u, 256u, 1024u}) {
        WeightedGraph g = generate_graph(GraphFamily::RandomConnected, n, 1);
        Sim sim = setup(g);
        LabelCodec codec = sim.codec();
        std::uint32_t b = ceil_log2(n);
        for (VertexId v = 0; v < n; ++v) {
            CHECK(codec.label_bits(sim.st[v].self_label) <= 3 * b * b);
            CHECK(table_bits(sim.st[v].table, n) <= 6 * (b + 1));
            CHECK(sim.st[v].self_label.light_edges.size() <= b);
        }
    }
}

TEST_CASE("malformed header with no applicable rule faults") {
    WeightedGraph g = generate_graph(GraphFamily::Path, 3, 1);
    Sim sim = setup(g);
    RoutingLabel bogus;
    bogus.dfs_number = 99; // outside every interval, and the root has no parent
    CHECK_THROWS_AS(route_next_hop(sim.st[0].table, bogus), ProtocolFault);
}
