#ifndef CONGEST_CHECKS_HPP
#define CONGEST_CHECKS_HPP

#include "congest/solver.hpp"

namespace congest {

// Centralized trace checks, run by the orchestrator between protocol phases
// when the assertion level allows. All throw ProtocolFault on violation.

// fragments partition V and their recorded edges span them; in phase 2
// recorded MWOEs may cross subtree boundaries, so strictness is optional
void check_fragment_forest(const Sim& sim, bool strict = true);

// every vertex of a fragment replicates the same virtual-node state
void check_replication(const Sim& sim);

// min active fragment size and the 2^i growth guarantee of Lenzen phases
void check_growth(const Sim& sim, std::uint32_t phase_index);

// K_b and base-tree depth against their asymptotic bounds with c = c' = 8
void check_base_bounds(const Sim& sim);

// matching is maximal; subtrees have size >= 2 and depth <= 3
void check_matching(const Sim& sim);

// chosen MWOEs equal the centralized per-fragment minima
void check_mwoe_truth(const Sim& sim);

// recorded-edge count per vertex stays within ceil(log2 n) + phase-1 phases
void check_edge_budget(const Sim& sim);

} // namespace congest

#endif
