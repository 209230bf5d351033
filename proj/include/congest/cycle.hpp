#ifndef CONGEST_CYCLE_HPP
#define CONGEST_CYCLE_HPP

#include <functional>
#include <optional>

#include "congest/solver.hpp"

namespace congest {

// The tree depth owned by slot i at macro-round t: d(T) + i - t.
std::uint32_t depth_of_slot(std::uint32_t slot, std::uint64_t t, std::uint32_t d_t);

struct CycleValue {
    std::uint64_t x = 0, y = 0;
    bool has = false;
};

enum class Agg : std::uint8_t { MinPair, Sum2, Or1, First, User };

using UserCombine = std::function<std::uint64_t(std::uint64_t, std::uint64_t)>;

// fold `in` into `acc`; returns true when acc changed (label adoption rule:
// equal values keep the incumbent)
bool fold_value(Agg agg, CycleValue& acc, const CycleValue& in, const UserCombine* user = nullptr);

// frames per macro-round for label-bearing extrinsic steps
void compute_cycle_widths(Sim& sim);

struct ConvCycle {
    const char* name = "conv";
    Agg agg = Agg::MinPair;
    UserCombine user; // with Agg::User
    bool wide = false; // a second label rides along as payload
    std::function<CycleValue(VertexId)> input;
    std::function<void(VertexId leader, const CycleValue&, const RoutingLabel* payload)> deliver;
    std::function<const RoutingLabel*(VertexId)> payload_label;            // with wide inputs
    std::function<void(VertexId, std::uint64_t)> on_upcast;                // per-vertex cache hook (sum flows)
    std::function<void(VertexId rB, const CycleValue&)> on_subset_partial; // cache hook at base roots
};

// Intrinsic convergecasts over all base-fragment trees, then the pipelined
// extrinsic step over T; the aggregate is routed to each fragment leader.
void run_convergecast_cycle(Sim& sim, const ConvCycle& spec);

struct BcastCycle {
    const char* name = "bcast";
    bool wide = false;
    std::function<CycleValue(VertexId leader)> publish; // !has = silent leader
    std::function<const RoutingLabel*(VertexId leader)> publish_payload;
    std::function<bool(VertexId rB)> query; // default: every non-leader base root
    std::function<void(VertexId v, const CycleValue&, const RoutingLabel* payload)> on_receive;
};

// P-Q broadcast cycle: leaders publish in p-slots, base roots query in
// q-slots, r_T answers each query with the stored message, then subsets
// flood intrinsically. on_receive fires at every vertex of a fragment whose
// leader published.
void run_broadcast_cycle(Sim& sim, const BcastCycle& spec);

struct AllocCycle {
    const char* name = "alloc";
    struct Item {
        std::uint32_t slot;
        bool is_p;
        std::uint64_t value;
    };
    std::function<std::optional<Item>(VertexId)> contribute;
    std::function<void(VertexId, std::uint64_t lo, std::uint64_t size)> deliver;
};

// Interval allocation at r_T: P messages set the range bottom, each Q of
// size S is answered with [bottom, bottom+S) and advances the bottom.
// sim.alloc_end records the final bottom.
void run_interval_allocation_cycle(Sim& sim, const AllocCycle& spec);

} // namespace congest

#endif
