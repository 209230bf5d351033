#ifndef CONGEST_PWA_HPP
#define CONGEST_PWA_HPP

#include <memory>
#include <string>
#include <vector>

#include "congest/graph.hpp"
#include "congest/metrics.hpp"
#include "congest/solver.hpp"

namespace congest {

struct AggregationSpec {
    std::string name;
    std::uint64_t identity = 0;
    std::function<std::uint64_t(std::uint64_t, std::uint64_t)> combine;
};

AggregationSpec aggregation_by_name(const std::string& name);

struct SolveResult {
    std::vector<std::uint32_t> msf_edges;   // edge indices into the input graph
    std::vector<std::uint64_t> pwa_output;  // per vertex, PWA mode only
    MetricsCounters metrics;
    std::vector<ReceptionEvent> reception_trace; // opt-in slot-ownership trace
};

// BFS + routing + base fragments + initial slots + leader announcements.
void run_setup(Sim& sim);

// Phase 1 over the graph, phase 2 over communication cycles; recorded edges
// form the MSF (the MST when no mask is given).
SolveResult solve_msf(const WeightedGraph& g, SolverConfig cfg, const SubgraphMask* mask = nullptr,
                      const Partition* part_for_mask = nullptr);

// PWA via MSF on the part-induced subgraph; the mask is derived on the fly
// from part-id probes, never stored.
SolveResult solve_pwa(const WeightedGraph& g, SolverConfig cfg, const Partition& part,
                      const AggregationSpec& agg, const std::vector<std::uint64_t>& inputs);

} // namespace congest

#endif
