#ifndef CONGEST_SOLVER_HPP
#define CONGEST_SOLVER_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "congest/engine.hpp"
#include "congest/graph.hpp"
#include "congest/metrics.hpp"
#include "congest/routing.hpp"

namespace congest {

enum class Mode : std::uint8_t { Mst, Msf, Pwa };
enum class AssertLevel : std::uint8_t { Off, Invariants, Oracle };

struct SolverConfig {
    Mode mode = Mode::Mst;
    EngineConfig engine;
    AssertLevel assert_level = AssertLevel::Invariants;
    std::uint32_t oracle_size_cap = 4096; // oracle-level checks are centralized
    bool collect_reception_trace = false; // opt-in slot-ownership trace
};

// Per-fragment MWOE candidate as seen from one vertex.
struct Cand {
    WeightRank rank = kNoValue; // kNoValue = no candidate
    PortId port = kNoPort;
    std::uint64_t neighbor_frag = kNoValue;

    bool valid() const { return rank != kNoValue; }
};

// Everything one simulated vertex stores. Wire traffic and the ledger are
// the authoritative protocol surface; this struct is the backing store.
struct SolVertex {
    // --- BFS tree T (permanent after setup)
    bool joined = false;
    std::uint32_t depth = 0;
    PortId parent_port = kNoPort;
    std::uint32_t child_count = 0;
    std::uint32_t tree_depth = 0; // d(T)
    // construction temporaries
    std::uint64_t join_round = 0;
    std::uint32_t depth_reports = 0;
    std::uint32_t max_depth_seen = 0;
    bool depth_done = false;

    // --- routing over T
    std::uint32_t subtree_size = 0;
    std::uint32_t size_reports = 0;
    std::uint64_t size_accum = 0;
    RoutingTable table;
    RoutingLabel self_label;
    bool routed = false;

    // --- fragment structure (phase 1, then base fragments)
    std::uint64_t frag_id = 0;
    bool frag_has_parent = false;
    PortId frag_parent_port = kNoPort;
    std::uint32_t frag_child_count = 0;
    std::vector<PortId> mst_ports; // recorded MST/MSF edges, at most O(log n)
    bool terminated = false;       // no outgoing candidate found
    bool small_component = false;  // terminated before the transition

    // phase-1 temporaries
    bool participating = false;
    std::uint32_t diam_reports = 0;
    std::uint32_t h1 = 0, h2 = 0; // top-2 child heights
    std::uint32_t diam_below = 0;
    Cand local_cand;
    Cand best_cand;
    PortId retrace_port = kNoPort;
    std::uint32_t cand_reports = 0;
    bool notified_vadj = false; // this vertex must send the merge request
    bool reoriented = false;
    bool req_noticed = false;

    // --- base fragment (fixed at the transition)
    std::uint64_t base_id = 0;
    bool base_root = false;
    PortId base_parent_port = kNoPort;
    std::uint32_t base_child_count = 0;

    // --- slots and cycle metadata
    std::uint32_t p_slot = 0; // fragment publishing slot (replicated)
    std::uint32_t q_slot = 0; // base fragment query slot, held at the base root; 0 = none
    RoutingLabel leader_label;
    bool have_leader_label = false;
    bool is_leader = false;         // fragment leader vertex
    std::uint32_t subset_count = 0; // at the leader: base fragments in this fragment
    std::uint32_t max_slot = 0;     // S, replicated over T

    // --- cycle transients
    std::uint64_t cyc_recv = 0;   // intrinsic reports received
    bool cyc_sent = false;
    std::uint64_t own_x = 0, own_y = 0;
    bool own_valid = false;
    RoutingLabel own_payload_label; // only wide cycles
    bool own_has_payload_label = false;

    // --- virtual-node state (phase 2; replicated per fragment)
    std::uint64_t color = 0;
    std::uint64_t parent_color = 0;
    std::uint64_t pre_shift_color = 0;
    bool matched = false;
    std::uint64_t partner = kNoValue;
    std::uint64_t vparent = kNoValue; // parent fragment id via the MWOE
    bool is_virtual_root = false;
    std::uint64_t subtree_parent = kNoValue;
    bool is_subtree_root = false;
    std::uint32_t subtree_depth_of_frag = 0;
    bool parent_matched = false;
    bool parent_winner = false;
    std::uint64_t matched_child = kNoValue;
    bool matched_child_winner = false;
    // local (not replicated)
    bool is_vadj = false; // adjacent to this phase's MWOE
    PortId mwoe_port = kNoPort;
    WeightRank mwoe_rank = kNoValue;
    PortId subtree_parent_port = kNoPort;
    std::uint64_t vx_x = 0, vx_y = 0; // exchange accumulator / received payload
    bool vx_valid = false;

    // --- slot-set generation caches
    std::uint64_t cached_upcast = 0;    // per-vertex 2(b) cache
    std::uint64_t cached_request = 0;   // 2(a) cache at the sending boundary vertex
    std::uint64_t cached_submitted = 0; // 2(c) cache at the base root
    std::uint64_t sg_child_sum = 0;     // at leader: pending child request total
    std::uint32_t sg_children_seen = 0; // at leader
    std::uint32_t virt_child_count = 0; // at leader, from step 1
    bool sg_ready = false;
    bool sg_sent = false;
    bool sg_published = false;
    bool new_announced = false;
    std::uint64_t sg_total = 0; // replicated via 2(d): fragment's request size
    std::uint64_t sg_interval_lo = 0, sg_interval_size = 0; // undistributed interval at leader
    bool sg_has_interval = false;
    std::uint64_t sg_got_lo = 0, sg_got_size = 0; // boundary vertex: interval received over MWOE
    bool sg_got = false;
    std::uint64_t pend_lo = 0, pend_size = 0; // base root: interval pending 4(c)
    bool pend_valid = false;
    std::uint32_t new_p_slot = 0, new_q_slot = 0;
    std::uint64_t new_frag_id = 0;
    RoutingLabel new_leader_label;
    bool new_valid = false;

    // --- PWA
    std::uint32_t part_id = 0;
    std::uint64_t pwa_input = 0;
    std::uint64_t pwa_output = 0;
    bool pwa_done = false;
};

struct GlobalInfo {
    std::uint32_t n = 0, m = 0;
    std::uint32_t id_bits = 1;   // b
    std::uint32_t rank_bits = 1; // weights travel as ranks 1..m
    VertexId root = 0;           // r_T
    std::uint32_t d_t = 0;
    std::uint32_t k_threshold = 0; // phase-1 stop threshold, max(d(T), ceil(sqrt n))
    std::uint32_t k_b = 0;         // base fragments (slots in the initial set)
    std::uint32_t d_b = 0;         // max base-fragment tree depth
    std::uint32_t max_slot = 0;    // S of the slot set in force
    std::uint32_t w_cyc = 1;       // frames per macro-round of label-bearing steps
    std::uint32_t w_wide = 1;      // cycles whose payload carries a second label
};

struct ReceptionEvent {
    std::uint64_t round;
    VertexId vertex;
    std::int32_t slot;
};

enum class Stage : std::uint8_t { Setup, Phase1, Phase2, Finish };

struct Sim {
    Sim(const WeightedGraph& g_, SolverConfig cfg_)
        : g(g_), cfg(cfg_), engine(g_, cfg_.engine), st(g_.vertex_count()) {
        glob.n = g_.vertex_count();
        glob.m = g_.edge_count();
        glob.id_bits = std::max<std::uint32_t>(bit_width_for(glob.n), 1);
        glob.rank_bits = std::max<std::uint32_t>(bit_width_for(std::max(glob.m, 1u)), 1);
        metrics.n = glob.n;
        metrics.m = glob.m;
    }

    const WeightedGraph& g;
    SolverConfig cfg;
    Engine engine;
    std::vector<SolVertex> st;
    GlobalInfo glob;
    MetricsCounters metrics;
    const SubgraphMask* mask = nullptr;
    const Partition* part = nullptr;
    Stage stage = Stage::Setup;
    std::function<void(Sim&, const char*, std::uint32_t)> checkpoint; // assertion hook
    std::uint32_t phase2_index = 0; // stamps cross-fragment pins
    std::uint64_t alloc_end = 0;    // r_T's final rangebottom after the last allocation
    std::vector<ReceptionEvent> reception_trace;

    LabelCodec codec() const { return LabelCodec(glob.n, glob.d_t); }

    void run(const PhaseConfig& pc, const RoundHandler& h) { metrics.add_phase(engine.run_phase(pc, h)); }
};

// Recompute the ledger groups of one vertex from its backing store. Handlers
// call this after mutating persistent state; transients are charged inline.
void account(Sim& sim, VertexId v);

inline std::uint32_t words_for(const Sim& sim, std::uint32_t bits) {
    return static_cast<std::uint32_t>(ceil_div(bits, sim.engine.word_bits()));
}

// Width of every persistent group, for the shadow recount in tests.
std::uint64_t audited_bits(const Sim& sim, VertexId v);

} // namespace congest

#endif
