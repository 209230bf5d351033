#ifndef CONGEST_PHASE1_HPP
#define CONGEST_PHASE1_HPP

#include "congest/solver.hpp"

namespace congest {

enum class MergeMode : std::uint8_t { Ghs, Lenzen };

// One fragment-merging phase run directly over the graph: probe, MWOE
// convergecast with retrace, merge requests, new-id flood with
// re-orientation and child census. In Lenzen mode only fragments of
// diameter <= 2^phase_index search; everyone answers.
void run_fragment_phase(Sim& sim, std::uint32_t phase_index, MergeMode mode);

// Runs Lenzen phases until the size threshold k = max(d(T), ceil(sqrt n))
// is guaranteed, then freezes base fragments and tags small components.
void form_base_fragments(Sim& sim);

} // namespace congest

#endif
