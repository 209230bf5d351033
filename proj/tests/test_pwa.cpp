#include <doctest.h>

#include <map>

#include "congest/phase2.hpp"
#include "congest/pwa.hpp"

using namespace congest;

TEST_CASE("all vertices in one part: sum of ones counts the graph") {
    WeightedGraph g = generate_graph(GraphFamily::RandomConnected, 16, 2);
    Partition part;
    part.part_of.assign(16, 0);
    part.part_count = 1;
    SolverConfig cfg;
    cfg.assert_level = AssertLevel::Oracle;
    std::vector<std::uint64_t> ones(16, 1);
    auto res = solve_pwa(g, cfg, part, aggregation_by_name("sum"), ones);
    for (auto x : res.pwa_output) CHECK(x == 16);
}

TEST_CASE("P5 split 3+2 with min over vertex ids") {
    WeightedGraph g = generate_graph(GraphFamily::Path, 5, 1);
    Partition part;
    part.part_of = {0, 0, 0, 1, 1};
    part.part_count = 2;
    SolverConfig cfg;
    cfg.assert_level = AssertLevel::Oracle;
    std::vector<std::uint64_t> ids = {1, 2, 3, 4, 5};
    auto res = solve_pwa(g, cfg, part, aggregation_by_name("min"), ids);
    CHECK(res.pwa_output[0] == 1);
    CHECK(res.pwa_output[1] == 1);
    CHECK(res.pwa_output[2] == 1);
    CHECK(res.pwa_output[3] == 4);
    CHECK(res.pwa_output[4] == 4);
}

TEST_CASE("random parts match centralized folds for every aggregation") {
    WeightedGraph g = generate_graph(GraphFamily::RandomConnected, 64, 1);
    Partition part = generate_partition(g, 5, 4);
    std::vector<std::uint64_t> inputs(64);
    Rng rng(99);
    for (auto& x : inputs) x = rng.below(1000) + 1;
    for (const char* name : {"min", "max", "sum", "xor"}) {
        SolverConfig cfg;
        cfg.assert_level = AssertLevel::Oracle; // internal fold comparison runs too
        AggregationSpec agg = aggregation_by_name(name);
        auto res = solve_pwa(g, cfg, part, agg, inputs);
        std::map<std::uint32_t, std::uint64_t> fold;
        for (VertexId v = 0; v < 64; ++v) {
            auto it = fold.find(part.part_of[v]);
            if (it == fold.end())
                fold[part.part_of[v]] = inputs[v];
            else
                it->second = agg.combine(it->second, inputs[v]);
        }
        for (VertexId v = 0; v < 64; ++v) CHECK(res.pwa_output[v] == fold[part.part_of[v]]);
    }
}

TEST_CASE("msf over a masked graph equals the Kruskal forest") {
    WeightedGraph g = generate_graph(GraphFamily::RandomConnected, 64, 2);
    Partition part = generate_partition(g, 3, 8);
    SubgraphMask mask = induced_mask(g, part);
    SolverConfig cfg;
    cfg.mode = Mode::Msf;
    cfg.assert_level = AssertLevel::Oracle;
    auto res = solve_msf(g, cfg, &mask, &part);
    CHECK(res.msf_edges == oracle_msf(g, &mask));
}

TEST_CASE("pwa on a graph whose parts end as small components") {
    // two tiny parts: both span their components during phase 1
    WeightedGraph g = generate_graph(GraphFamily::Path, 6, 3);
    Partition part;
    part.part_of = {0, 0, 0, 1, 1, 1};
    part.part_count = 2;
    SolverConfig cfg;
    cfg.assert_level = AssertLevel::Oracle;
    std::vector<std::uint64_t> inputs = {5, 1, 9, 2, 8, 4};
    auto res = solve_pwa(g, cfg, part, aggregation_by_name("max"), inputs);
    CHECK(res.pwa_output[0] == 9);
    CHECK(res.pwa_output[3] == 8);
}

TEST_CASE("solver runs are reproducible bit for bit") {
    WeightedGraph g = generate_graph(GraphFamily::RandomConnected, 32, 6);
    SolverConfig cfg;
    cfg.assert_level = AssertLevel::Invariants;
    auto a = solve_msf(g, cfg);
    auto b = solve_msf(g, cfg);
    CHECK(a.msf_edges == b.msf_edges);
    CHECK(a.metrics.frame_rounds == b.metrics.frame_rounds);
    CHECK(a.metrics.frames_sent == b.metrics.frames_sent);
    CHECK(a.metrics.peak_bits_global == b.metrics.peak_bits_global);
}

TEST_CASE("ledger shadow recount: live bits match the backing store after a run") {
    WeightedGraph g = generate_graph(GraphFamily::RandomConnected, 48, 3, 2);
    SolverConfig cfg;
    cfg.assert_level = AssertLevel::Off;
    Sim sim(g, cfg);
    run_setup(sim);
    run_second_part(sim);
    for (VertexId v = 0; v < sim.glob.n; ++v) {
        const MemoryLedger& led = sim.engine.ledger(v);
        // transient relay registers must all be released
        CHECK(led.get(Reg::CycleTmp) == 0);
        CHECK(led.get(Reg::RootMsg) == 0);
        std::uint64_t before = led.live_bits();
        account(sim, v); // recomputing from the structs must not change anything
        CHECK(sim.engine.ledger(v).live_bits() == before);
        CHECK(audited_bits(sim, v) == before);
        CHECK(led.peak_bits() <= sim.engine.budget_bits());
    }
}

TEST_CASE("aggregations satisfy identity, commutativity, and associativity") {
    Rng rng(7);
    for (const char* name : {"min", "max", "sum", "xor"}) {
        AggregationSpec agg = aggregation_by_name(name);
        for (int i = 0; i < 50; ++i) {
            std::uint64_t x = rng.below(1 << 20), y = rng.below(1 << 20), z = rng.below(1 << 20);
            CHECK(agg.combine(agg.identity, x) == x);
            CHECK(agg.combine(x, y) == agg.combine(y, x));
            CHECK(agg.combine(agg.combine(x, y), z) == agg.combine(x, agg.combine(y, z)));
        }
    }
    CHECK_THROWS_AS(aggregation_by_name("median"), InputError);
}

TEST_CASE("pwa-mode state costs only a few extra words per vertex") {
    WeightedGraph g = generate_graph(GraphFamily::RandomConnected, 64, 5, 2);
    Partition part = generate_partition(g, 4, 2);
    std::vector<std::uint64_t> inputs(64, 3);
    SolverConfig cfg;
    cfg.assert_level = AssertLevel::Off;
    Sim sim(g, cfg);
    sim.cfg.mode = Mode::Pwa;
    for (VertexId v = 0; v < 64; ++v) {
        sim.st[v].part_id = part.part_of[v];
        sim.st[v].pwa_input = inputs[v];
        account(sim, v);
    }
    run_setup(sim);
    run_second_part(sim);
    std::uint32_t b = bit_width_for(64);
    for (VertexId v = 0; v < 64; ++v)
        CHECK(sim.engine.ledger(v).slot_peak(Reg::Pwa) <= 8 * b);
}
