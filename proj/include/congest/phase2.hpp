#ifndef CONGEST_PHASE2_HPP
#define CONGEST_PHASE2_HPP

#include "congest/cycle.hpp"
#include "congest/solver.hpp"

namespace congest {

// MWOE discovery over cycles: probe round, convergecast of the minimum
// candidate, broadcast of (edge, parent fragment), merge announcements with
// virtual-root resolution, and the active-fragment count at r_T.
// Returns the number of active fragments.
std::uint64_t discover_mwoes(Sim& sim);

// Virtual-tree message exchanges built from O(1) cycles plus single rounds
// over MWOEs. To-all-children: payload composed from replicated parent
// state, delivered fragment-wide at every child. To-parent: optional
// per-child value, aggregated at the parent's leader and broadcast. The
// to-one-child shape (queries, election of one child, response) runs inside
// run_gkp_phase's matching rounds.
void vx_to_all_children(Sim& sim, const char* name,
                        const std::function<std::pair<std::uint64_t, std::uint64_t>(VertexId)>& payload,
                        const std::function<void(VertexId, std::uint64_t, std::uint64_t)>& deliver);
void vx_to_parent(Sim& sim, const char* name, Agg agg,
                  const std::function<bool(VertexId)>& child_sends,
                  const std::function<std::pair<std::uint64_t, std::uint64_t>(VertexId)>& value,
                  const std::function<void(VertexId, const CycleValue&)>& deliver_leader,
                  bool publish, const std::function<void(VertexId, std::uint64_t, std::uint64_t)>& on_receive);

// Cole-Vishkin reduction to colors {0,1,2} on the virtual forest.
void three_coloring(Sim& sim);

// Maximal matching on the colored virtual forest: per color class, queries
// from unmatched children, election of the smallest proposer, confirmation
// over the MWOE.
void run_matching(Sim& sim);

// coloring + maximal matching + attachment + slot-set generation + merge
void run_gkp_phase(Sim& sim);

// Loops GKP phases until r_T counts zero active fragments.
void run_second_part(Sim& sim);

} // namespace congest

#endif
