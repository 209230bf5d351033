#ifndef CONGEST_SLOTS_HPP
#define CONGEST_SLOTS_HPP

#include <string>

#include "congest/solver.hpp"

namespace congest {

struct SlotReport {
    bool ok = true;
    std::string violation;
};

// Centralized structural check of the slot set in force: per fragment a
// consecutive range, first slot at the leader, one q-slot per non-leader
// base fragment, ranges disjoint and within [1, 2 K_b].
SlotReport validate_slot_set(const Sim& sim);

// The five-step slot-set generation over the virtual subtrees, finishing
// with the new-id/slot/label announcement over old slots. Requires the
// subtree relations of the current GKP phase.
void generate_slot_set(Sim& sim);

} // namespace congest

#endif
