#include <doctest.h>

#include "congest/cycle.hpp"
#include "congest/spanning.hpp"

using namespace congest;

namespace {

// P4 path 0-1-2-3 rooted at 0 (d(T)=3) with hand-assigned base fragments:
// {1} in slot 1 and {3} in slot 2; vertices 0 and 2 only forward.
Sim two_fragment_sim(WeightedGraph& g) {
    SolverConfig cfg;
    cfg.assert_level = AssertLevel::Off;
    cfg.collect_reception_trace = true;
    Sim sim(g, cfg);
    build_bfs_tree(sim);
    compute_cycle_widths(sim);
    setup_routing(sim);
    sim.stage = Stage::Phase2;
    for (VertexId v : {1u, 3u}) {
        SolVertex& s = sim.st[v];
        s.frag_id = v + 1;
        s.base_id = v + 1;
        s.base_root = true;
        s.base_parent_port = kNoPort;
        s.base_child_count = 0;
        s.is_leader = true;
        s.subset_count = 1;
        s.p_slot = v == 1 ? 1 : 2;
        s.leader_label = s.self_label;
        s.have_leader_label = true;
        s.max_slot = 2;
        account(sim, v);
    }
    for (VertexId v : {0u, 2u}) {
        sim.st[v].small_component = true;
        sim.st[v].base_id = v + 1;
        account(sim, v);
    }
    sim.glob.max_slot = 2;
    sim.glob.k_b = 2;
    sim.glob.d_b = 0;
    return sim;
}

} // namespace

TEST_CASE("window depth follows d(T)+i-t") {
    CHECK(depth_of_slot(1, 1, 3) == 3);
    CHECK(depth_of_slot(2, 2 + 3, 3) == 0);
    CHECK(depth_of_slot(5, 5 + 7, 7) == 0);
    CHECK(depth_of_slot(2, 4, 3) == 1);
    CHECK_THROWS_AS(depth_of_slot(2, 1, 3), ProtocolFault);
    CHECK_THROWS_AS(depth_of_slot(2, 6, 3), ProtocolFault);
}

TEST_CASE("fold rules and label adoption") {
    CycleValue acc;
    CHECK(fold_value(Agg::MinPair, acc, CycleValue{5, 9, true}));
    CHECK(!fold_value(Agg::MinPair, acc, CycleValue{5, 9, true})); // tie keeps incumbent
    CHECK(fold_value(Agg::MinPair, acc, CycleValue{4, 0, true}));
    CHECK(acc.x == 4);
    CycleValue sum;
    fold_value(Agg::Sum2, sum, CycleValue{2, 1, true});
    fold_value(Agg::Sum2, sum, CycleValue{3, 1, true});
    CHECK(sum.x == 5);
    CHECK(sum.y == 2);
}

TEST_CASE("convergecast cycle delivers per-fragment minima on schedule") {
    WeightedGraph g = generate_graph(GraphFamily::Path, 4, 1);
    Sim sim = two_fragment_sim(g);
    std::map<VertexId, std::uint64_t> got;
    ConvCycle conv;
    conv.name = "test_conv";
    conv.agg = Agg::MinPair;
    conv.input = [&](VertexId v) {
        if (v == 1) return CycleValue{5, 0, true};
        if (v == 3) return CycleValue{7, 0, true};
        return CycleValue{};
    };
    conv.deliver = [&](VertexId leader, const CycleValue& val, const RoutingLabel*) {
        got[leader] = val.x;
    };
    run_convergecast_cycle(sim, conv);
    REQUIRE(got.size() == 2);
    CHECK(got[1] == 5);
    CHECK(got[3] == 7);

    // the root handles slot i exactly at round i + d(T)
    bool root_slot1_at_4 = false, root_slot2_at_5 = false;
    for (const auto& ev : sim.reception_trace) {
        if (ev.vertex == 0 && ev.slot == 1 && ev.round == 4) root_slot1_at_4 = true;
        if (ev.vertex == 0 && ev.slot == 2 && ev.round == 5) root_slot2_at_5 = true;
    }
    CHECK(root_slot1_at_4);
    CHECK(root_slot2_at_5);
    // extrinsic step ran exactly (2 d(T) + S) * W frame-rounds
    const CycleRecord& rec = sim.metrics.cycles.back();
    CHECK(rec.extrinsic_frame_rounds == (2 * 3 + 2) * rec.w);
    CHECK(sim.metrics.congestion_violations == 0);
}

TEST_CASE("degenerate single-slot convergecast at the root fragment") {
    WeightedGraph g = generate_graph(GraphFamily::Path, 4, 1);
    SolverConfig cfg;
    cfg.assert_level = AssertLevel::Off;
    Sim sim(g, cfg);
    build_bfs_tree(sim);
    compute_cycle_widths(sim);
    setup_routing(sim);
    sim.stage = Stage::Phase2;
    // one fragment covering the whole path, leader at the BFS root itself
    for (VertexId v = 0; v < 4; ++v) {
        SolVertex& s = sim.st[v];
        s.frag_id = 1;
        s.base_id = 1;
        s.base_root = v == 0;
        s.base_parent_port = s.parent_port;
        s.base_child_count = s.child_count;
        s.is_leader = v == 0;
        s.subset_count = 1;
        s.p_slot = 1;
        s.leader_label = sim.st[0].self_label;
        s.have_leader_label = true;
        s.max_slot = 1;
        account(sim, v);
    }
    sim.glob.max_slot = 1;
    sim.glob.k_b = 1;
    sim.glob.d_b = 3;
    std::uint64_t got = 0;
    ConvCycle conv;
    conv.name = "whole";
    conv.agg = Agg::MinPair;
    conv.input = [&](VertexId v) { return CycleValue{5 - v, 0, true}; };
    conv.deliver = [&](VertexId leader, const CycleValue& val, const RoutingLabel*) {
        CHECK(leader == 0);
        got = val.x;
    };
    run_convergecast_cycle(sim, conv);
    CHECK(got == 2); // min over {5,4,3,2}
}

TEST_CASE("single-base fragments: leaders serve their own bases locally") {
    WeightedGraph g = generate_graph(GraphFamily::Path, 4, 1);
    Sim sim = two_fragment_sim(g);
    std::map<VertexId, std::uint64_t> got;
    BcastCycle bc;
    bc.name = "test_bcast";
    bc.publish = [&](VertexId leader) { return CycleValue{100 + leader, 0, true}; };
    bc.on_receive = [&](VertexId v, const CycleValue& val, const RoutingLabel*) { got[v] = val.x; };
    run_broadcast_cycle(sim, bc);
    REQUIRE(got.size() == 2);
    CHECK(got[1] == 101);
    CHECK(got[3] == 103);
}

TEST_CASE("each query slot is answered by its own range's publisher") {
    // path of 10; five singleton base fragments in two p-q ranges {1,2} and
    // {3,4,5}; the remaining vertices only forward
    WeightedGraph g = generate_graph(GraphFamily::Path, 10, 1);
    SolverConfig cfg;
    cfg.assert_level = AssertLevel::Off;
    Sim sim(g, cfg);
    build_bfs_tree(sim);
    compute_cycle_widths(sim);
    setup_routing(sim);
    sim.stage = Stage::Phase2;
    struct Spot {
        VertexId v;
        std::uint64_t frag;
        bool leader;
        std::uint32_t p, q;
    };
    // fragment A = {v1 (leader, p=1), v2 (q=2)}, fragment B = {v3 (p=3), v4 (q=4), v5 (q=5)}
    std::vector<Spot> spots = {{1, 100, true, 1, 0},
                               {2, 100, false, 1, 2},
                               {3, 200, true, 3, 0},
                               {4, 200, false, 3, 4},
                               {5, 200, false, 3, 5}};
    for (const auto& sp : spots) {
        SolVertex& s = sim.st[sp.v];
        s.frag_id = sp.frag;
        s.base_id = sp.v + 1;
        s.base_root = true;
        s.base_parent_port = kNoPort;
        s.base_child_count = 0;
        s.is_leader = sp.leader;
        s.subset_count = sp.leader ? (sp.frag == 100 ? 2 : 3) : 0;
        s.p_slot = sp.p;
        s.q_slot = sp.q;
        s.leader_label = sim.st[sp.frag == 100 ? 1 : 3].self_label;
        s.have_leader_label = true;
        s.max_slot = 5;
        account(sim, sp.v);
    }
    for (VertexId v : {0u, 6u, 7u, 8u, 9u}) {
        sim.st[v].small_component = true;
        sim.st[v].base_id = v + 1;
        account(sim, v);
    }
    sim.glob.max_slot = 5;
    sim.glob.k_b = 5;

    std::map<VertexId, std::uint64_t> got;
    BcastCycle bc;
    bc.name = "pq_ranges";
    bc.publish = [&](VertexId leader) { return CycleValue{leader == 1 ? 11u : 22u, 0, true}; };
    bc.on_receive = [&](VertexId v, const CycleValue& val, const RoutingLabel*) { got[v] = val.x; };
    run_broadcast_cycle(sim, bc);
    REQUIRE(got.size() == 5);
    CHECK(got[1] == 11);
    CHECK(got[2] == 11);
    CHECK(got[3] == 22);
    CHECK(got[4] == 22);
    CHECK(got[5] == 22); // the slot-5 query fetches fragment B's message
    CHECK(sim.metrics.congestion_violations == 0);
}

TEST_CASE("a silent leader leaves its whole range quiet") {
    WeightedGraph g = generate_graph(GraphFamily::Path, 4, 1);
    Sim sim = two_fragment_sim(g);
    std::map<VertexId, std::uint64_t> got;
    BcastCycle bc;
    bc.name = "silent";
    bc.publish = [&](VertexId leader) {
        if (leader == 1) return CycleValue{}; // terminated-style silence
        return CycleValue{77, 0, true};
    };
    bc.on_receive = [&](VertexId v, const CycleValue& val, const RoutingLabel*) { got[v] = val.x; };
    run_broadcast_cycle(sim, bc);
    REQUIRE(got.size() == 1);
    CHECK(got[3] == 77);
}

TEST_CASE("interval allocation hands out prefix-sum ranges in slot order") {
    // three singleton fragments on a path of 6, slots 1..3, rootless variant
    WeightedGraph g = generate_graph(GraphFamily::Path, 6, 1);
    SolverConfig cfg;
    cfg.assert_level = AssertLevel::Off;
    Sim sim(g, cfg);
    build_bfs_tree(sim);
    compute_cycle_widths(sim);
    setup_routing(sim);
    sim.stage = Stage::Phase2;
    std::vector<VertexId> leaders = {1, 3, 5};
    for (std::size_t i = 0; i < leaders.size(); ++i) {
        VertexId v = leaders[i];
        SolVertex& s = sim.st[v];
        s.frag_id = v + 1;
        s.base_id = v + 1;
        s.base_root = true;
        s.base_parent_port = kNoPort;
        s.base_child_count = 0;
        s.is_leader = true;
        s.subset_count = 1;
        s.p_slot = static_cast<std::uint32_t>(i + 1);
        s.leader_label = s.self_label;
        s.have_leader_label = true;
        s.max_slot = 3;
        account(sim, v);
    }
    for (VertexId v : {0u, 2u, 4u}) {
        sim.st[v].small_component = true;
        sim.st[v].base_id = v + 1;
        account(sim, v);
    }
    sim.glob.max_slot = 3;
    sim.glob.k_b = 3;

    std::map<VertexId, std::pair<std::uint64_t, std::uint64_t>> got;
    AllocCycle al;
    al.name = "test_alloc";
    al.contribute = [&](VertexId v) -> std::optional<AllocCycle::Item> {
        if (v == 1) return AllocCycle::Item{1, false, 2};
        if (v == 3) return AllocCycle::Item{2, false, 3};
        if (v == 5) return AllocCycle::Item{3, false, 1};
        return std::nullopt;
    };
    al.deliver = [&](VertexId v, std::uint64_t lo, std::uint64_t size) { got[v] = {lo, size}; };
    run_interval_allocation_cycle(sim, al);
    REQUIRE(got.size() == 3);
    CHECK(got[1] == std::pair<std::uint64_t, std::uint64_t>{1, 2});
    CHECK(got[3] == std::pair<std::uint64_t, std::uint64_t>{3, 3});
    CHECK(got[5] == std::pair<std::uint64_t, std::uint64_t>{6, 1});
    CHECK(sim.alloc_end == 7);
}

TEST_CASE("a leader that publishes a range bottom shifts the allocations") {
    WeightedGraph g = generate_graph(GraphFamily::Path, 4, 1);
    Sim sim = two_fragment_sim(g);
    std::map<VertexId, std::pair<std::uint64_t, std::uint64_t>> got;
    AllocCycle al;
    al.name = "leadered";
    al.contribute = [&](VertexId v) -> std::optional<AllocCycle::Item> {
        if (v == 1) return AllocCycle::Item{1, true, 10}; // P: bottom = 10
        if (v == 3) return AllocCycle::Item{2, false, 4}; // Q: size 4
        return std::nullopt;
    };
    al.deliver = [&](VertexId v, std::uint64_t lo, std::uint64_t size) { got[v] = {lo, size}; };
    run_interval_allocation_cycle(sim, al);
    REQUIRE(got.size() == 1);
    CHECK(got[3] == std::pair<std::uint64_t, std::uint64_t>{10, 4});
}
