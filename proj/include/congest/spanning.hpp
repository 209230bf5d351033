#ifndef CONGEST_SPANNING_HPP
#define CONGEST_SPANNING_HPP

#include "congest/cycle.hpp"
#include "congest/solver.hpp"

namespace congest {

// Layered BFS from sim.glob.root: every vertex learns parent port, depth,
// child count, and d(T). O(D) rounds, O(m) frames.
void build_bfs_tree(Sim& sim);

// Thorup-Zwick setup over T: subtree sizes up, DFS intervals and labels down.
void setup_routing(Sim& sim);

// Interval allocation over T (requests aggregated up, ranges split down).
// Every base-fragment root outside small components requests one slot.
// Fills p_slot at the requesters and K_b / max_slot globals.
void assign_initial_slots(Sim& sim);

// r_T floods (max_slot, K_b) over T so cycle schedules are locally computable.
void broadcast_slot_bound(Sim& sim);

// Base-fragment roots announce their slot and routing label inside their trees.
void broadcast_leader_info(Sim& sim);

enum class TreeView : std::uint8_t { Fragment, Base };

// Compact-representation tree primitives. Both run simultaneously over every
// tree of the chosen view (disjoint fragments interleave freely).

// One pre-round of request pins, then origins flood their payloads; every
// vertex of a tree with an origin sees on_receive exactly once.
PhaseStats tree_broadcast(Sim& sim, TreeView view,
                          const std::function<std::optional<std::uint64_t>(VertexId)>& origin_payload,
                          const std::function<void(VertexId, std::uint64_t)>& on_receive);

// Children report upward once their own counts are complete; roots receive
// the fold and every vertex keeps a retrace port toward the child whose
// value it forwarded (minimum-style retracing).
PhaseStats tree_convergecast(Sim& sim, TreeView view, Agg agg,
                             const std::function<CycleValue(VertexId)>& input,
                             const std::function<void(VertexId, const CycleValue&)>& deliver_root,
                             const UserCombine& user = {});

} // namespace congest

#endif
