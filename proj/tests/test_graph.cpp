#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <set>

#include "congest/graph.hpp"

using namespace congest;

namespace {
std::string write_tmp(const std::string& content) {
    static int counter = 0;
    std::string path = "graph_test_" + std::to_string(counter++) + ".txt";
    std::ofstream out(path);
    out << content;
    return path;
}
} // namespace

TEST_CASE("load_graph parses a triangle") {
    auto path = write_tmp("3 3\n1 2 1\n2 3 2\n1 3 3\n");
    WeightedGraph g = load_graph(path);
    CHECK(g.vertex_count() == 3);
    CHECK(g.edge_count() == 3);
    std::remove(path.c_str());
}

TEST_CASE("load_graph rejects duplicate weights") {
    auto path = write_tmp("3 3\n1 2 5\n2 3 5\n1 3 3\n");
    CHECK_THROWS_WITH_AS(load_graph(path), doctest::Contains("duplicate weight"), InputError);
    std::remove(path.c_str());
}

TEST_CASE("load_graph accepts a single vertex with no edges") {
    auto path = write_tmp("1 0\n");
    WeightedGraph g = load_graph(path);
    CHECK(g.vertex_count() == 1);
    CHECK(g.edge_count() == 0);
    std::remove(path.c_str());
}

TEST_CASE("load_graph rejects a disconnected graph in MST mode") {
    auto path = write_tmp("4 2\n1 2 1\n3 4 2\n");
    CHECK_THROWS(load_graph(path, true));
    std::remove(path.c_str());
}

TEST_CASE("generator families") {
    WeightedGraph p5 = generate_graph(GraphFamily::Path, 5, 1);
    CHECK(p5.edge_count() == 4);
    WeightedGraph c4 = generate_graph(GraphFamily::Cycle, 4, 7);
    CHECK(c4.edge_count() == 4);
    std::set<std::uint64_t> weights;
    for (const auto& e : c4.edges()) weights.insert(e.weight);
    CHECK(weights == std::set<std::uint64_t>{1, 2, 3, 4});
}

TEST_CASE("random generator is deterministic") {
    WeightedGraph a = generate_graph(GraphFamily::RandomConnected, 64, 1);
    WeightedGraph b = generate_graph(GraphFamily::RandomConnected, 64, 1);
    REQUIRE(a.edge_count() == b.edge_count());
    for (std::uint32_t i = 0; i < a.edge_count(); ++i) {
        CHECK(a.edge(i).u == b.edge(i).u);
        CHECK(a.edge(i).v == b.edge(i).v);
        CHECK(a.edge(i).weight == b.edge(i).weight);
    }
    CHECK(a.is_connected());
}

TEST_CASE("port lists are consistent") {
    WeightedGraph g = generate_graph(GraphFamily::RandomConnected, 32, 3);
    for (VertexId v = 0; v < g.vertex_count(); ++v)
        for (PortId p = 0; p < g.degree(v); ++p) {
            VertexId u = g.neighbor(v, p);
            PortId q = g.reverse_port(v, p);
            CHECK(g.neighbor(u, q) == v);
            CHECK(g.edge_at(u, q) == g.edge_at(v, p));
        }
}

TEST_CASE("induced_mask follows part boundaries") {
    auto path = write_tmp("3 3\n1 2 1\n2 3 2\n1 3 3\n");
    WeightedGraph g = load_graph(path);
    std::remove(path.c_str());
    Partition p;
    p.part_of = {0, 0, 1};
    p.part_count = 2;
    SubgraphMask mask = induced_mask(g, p);
    int members = 0;
    for (std::uint32_t e = 0; e < g.edge_count(); ++e)
        if (mask.in_h(e)) {
            ++members;
            CHECK(g.edge(e).weight == 1); // only the (1,2) edge stays
        }
    CHECK(members == 1);
}

TEST_CASE("induced_mask with one part keeps everything") {
    WeightedGraph g = generate_graph(GraphFamily::RandomConnected, 16, 2);
    Partition p;
    p.part_of.assign(16, 0);
    p.part_count = 1;
    SubgraphMask mask = induced_mask(g, p);
    for (std::uint32_t e = 0; e < g.edge_count(); ++e) CHECK(mask.in_h(e));
}

TEST_CASE("induced_mask on P5 split 3+2") {
    WeightedGraph g = generate_graph(GraphFamily::Path, 5, 1);
    Partition p;
    p.part_of = {0, 0, 0, 1, 1};
    p.part_count = 2;
    SubgraphMask mask = induced_mask(g, p);
    int members = 0;
    for (std::uint32_t e = 0; e < g.edge_count(); ++e)
        if (mask.in_h(e)) ++members;
    CHECK(members == 3);
}

TEST_CASE("partition with a disconnected part is rejected") {
    WeightedGraph g = generate_graph(GraphFamily::Path, 5, 1);
    Partition p;
    p.part_of = {0, 1, 0, 1, 1}; // part 0 = {v1, v3}, not connected
    p.part_count = 2;
    CHECK_THROWS(validate_partition(g, p));
}

TEST_CASE("oracle_msf picks the lightest spanning edges") {
    auto path = write_tmp("3 3\n1 2 1\n2 3 2\n1 3 3\n");
    WeightedGraph g = load_graph(path);
    std::remove(path.c_str());
    auto mst = oracle_msf(g);
    REQUIRE(mst.size() == 2);
    std::set<std::uint64_t> w;
    for (auto e : mst) w.insert(g.edge(e).weight);
    CHECK(w == std::set<std::uint64_t>{1, 2});
}

TEST_CASE("oracle_msf drops the heaviest cycle edge") {
    auto path = write_tmp("4 4\n1 2 1\n2 3 2\n3 4 3\n4 1 4\n");
    WeightedGraph g = load_graph(path);
    std::remove(path.c_str());
    auto mst = oracle_msf(g);
    std::set<std::uint64_t> w;
    for (auto e : mst) w.insert(g.edge(e).weight);
    CHECK(w == std::set<std::uint64_t>{1, 2, 3});
}

TEST_CASE("oracle_msf is deterministic under distinct weights") {
    WeightedGraph g = generate_graph(GraphFamily::RandomConnected, 64, 1);
    auto a = oracle_msf(g);
    auto b = oracle_msf(g);
    CHECK(a == b);
    CHECK(a.size() == 63);
}

TEST_CASE("generated partitions are connected and deterministic") {
    WeightedGraph g = generate_graph(GraphFamily::RandomConnected, 48, 5);
    Partition a = generate_partition(g, 4, 9);
    Partition b = generate_partition(g, 4, 9);
    CHECK(a.part_of == b.part_of);
    validate_partition(g, a);
}
