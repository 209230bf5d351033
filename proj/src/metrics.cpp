#include "congest/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "congest/common.hpp"

namespace congest {

void MetricsCounters::add_phase(PhaseStats ps) {
    frame_rounds += ps.frame_rounds;
    frames_sent += ps.frames;
    logical_messages_sent += ps.logical_messages;
    phases.push_back(std::move(ps));
}

std::string peak_histogram(const MetricsCounters& mc) {
    // power-of-two buckets: "64:12 128:3" means 12 vertices peaked in (32,64] etc.
    std::vector<std::pair<std::uint64_t, std::uint64_t>> buckets;
    for (auto p : mc.peak_bits_per_vertex) {
        std::uint64_t b = 1;
        while (b < p) b <<= 1;
        bool found = false;
        for (auto& [bk, cnt] : buckets)
            if (bk == b) {
                ++cnt;
                found = true;
            }
        if (!found) buckets.push_back({b, 1});
    }
    std::sort(buckets.begin(), buckets.end());
    std::ostringstream ss;
    for (std::size_t i = 0; i < buckets.size(); ++i) {
        if (i) ss << " ";
        ss << buckets[i].first << ":" << buckets[i].second;
    }
    return ss.str();
}

void write_metrics_csv(const MetricsCounters& mc, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open metrics file: " + path);
    out << "phase,rounds,frames,logical_messages,peak_bits_global,peak_bits_histogram\n";
    for (const auto& ps : mc.phases)
        out << ps.name << "," << ps.frame_rounds << "," << ps.frames << "," << ps.logical_messages
            << ",,\n";
    out << "total," << mc.frame_rounds << "," << mc.frames_sent << "," << mc.logical_messages_sent
        << "," << mc.peak_bits_global << "," << peak_histogram(mc) << "\n";
    out << "# n=" << mc.n << " m=" << mc.m << " d_t=" << mc.d_t << " k_b=" << mc.k_b
        << " d_b=" << mc.d_b << " phase1=" << mc.phase1_count << " phase2=" << mc.phase2_count
        << " cycles=" << mc.cycles_total << " max_cycles_per_phase=" << mc.max_cycles_per_phase
        << "\n";
}

} // namespace congest
