#ifndef CONGEST_METRICS_HPP
#define CONGEST_METRICS_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace congest {

struct PhaseStats {
    std::string name;
    std::uint64_t frame_rounds = 0;
    std::uint64_t macro_rounds = 0;
    std::uint32_t frames_per_macro = 1;
    std::uint64_t frames = 0;
    std::uint64_t logical_messages = 0;
};

enum class CycleKind : std::uint8_t { Convergecast, Broadcast, IntervalAllocation };

// One record per communication cycle, for the per-cycle bound checks.
struct CycleRecord {
    CycleKind kind;
    std::uint64_t extrinsic_frame_rounds = 0;
    std::uint64_t intrinsic_frame_rounds = 0;
    std::uint32_t w = 1;          // frames per macro-round of the extrinsic step
    std::uint32_t max_slot = 0;   // S, the largest slot value in force
    std::uint32_t d_t = 0;        // BFS tree depth
    std::uint32_t k_b = 0;        // number of base fragments
    std::uint32_t d_b = 0;        // max base-fragment tree depth
};

struct MetricsCounters {
    std::uint64_t frame_rounds = 0;
    std::uint64_t frames_sent = 0;
    std::uint64_t logical_messages_sent = 0;
    std::uint64_t peak_bits_global = 0;
    std::vector<std::uint64_t> peak_bits_per_vertex;

    std::uint64_t congestion_violations = 0; // multi-slot receptions in one macro-round
    std::uint64_t root_msg_violations = 0;   // r_T holding >1 stored cycle message
    std::uint64_t root_msg_peak_bits = 0;    // widest msg_T ever stored at r_T

    std::vector<PhaseStats> phases;
    std::vector<CycleRecord> cycles;

    // run-level facts filled by the solver
    std::uint32_t n = 0, m = 0;
    std::uint32_t d_t = 0;
    std::uint32_t k_b = 0;
    std::uint32_t d_b = 0;
    std::uint32_t phase1_count = 0;
    std::uint32_t phase2_count = 0;
    std::uint64_t cycles_total = 0;
    std::uint32_t max_cycles_per_phase = 0;

    void add_phase(PhaseStats ps);
};

// CSV schema: phase, rounds, frames, logical_messages, peak_bits_global, peak_bits_histogram
void write_metrics_csv(const MetricsCounters& mc, const std::string& path);
std::string peak_histogram(const MetricsCounters& mc);

} // namespace congest

#endif
