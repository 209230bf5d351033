// Acceptance suite: one pass/fail line per criterion.
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <set>
#include <vector>

#include "congest/checks.hpp"
#include "congest/pwa.hpp"
#include "congest/spanning.hpp"

using namespace congest;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("criterion %2d: %s  %s\n", criterion, pass ? "PASS" : "FAIL", detail.c_str());
    if (!pass) ++failures;
}

struct RunStats {
    std::uint32_t n, m;
    MetricsCounters metrics;
};

// pinned thresholds
constexpr double kFramesConst = 256.0;   // frames <= c * (m log n + n log^2 n)
constexpr double kRoundsConst = 256.0;   // frame-rounds <= c * (d(T)+sqrt n) log^2 n
constexpr double kMemExponent = 0.2;     // fitted peak-vs-n exponent cap
constexpr std::uint32_t kCyclesPerPhase = 60;
constexpr std::uint32_t kLabelConst = 3; // label bits <= c_l * ceil(log2 n)^2
constexpr std::uint32_t kTableConst = 6; // table bits <= c_t * ceil(log2 n)

double log2d(double x) { return std::log2(std::max(x, 2.0)); }

} // namespace

int main() {
    std::vector<RunStats> runs;
    bool c1 = true, c2 = true;
    std::string c1_detail, c2_detail;

    // criterion 1: 200 random connected graphs vs Kruskal
    {
        const std::uint32_t sizes[] = {16, 64, 256, 1024};
        const std::uint32_t extras[] = {2, 4, 8, 16};
        std::size_t count = 0;
        for (std::uint32_t si = 0; si < 4 && c1; ++si) {
            for (std::uint64_t seed = 1; seed <= 50 && c1; ++seed) {
                std::uint32_t n = sizes[si];
                WeightedGraph g =
                    generate_graph(GraphFamily::RandomConnected, n, seed, extras[seed % 4]);
                SolverConfig cfg;
                cfg.assert_level = AssertLevel::Invariants;
                try {
                    SolveResult res = solve_msf(g, cfg);
                    if (res.msf_edges != oracle_msf(g)) {
                        c1 = false;
                        c1_detail = "edge-set mismatch at n=" + std::to_string(n) +
                                    " seed=" + std::to_string(seed);
                        break;
                    }
                    runs.push_back(RunStats{n, g.edge_count(), std::move(res.metrics)});
                    ++count;
                } catch (const std::exception& e) {
                    c1 = false;
                    c1_detail = std::string("fault at n=") + std::to_string(n) +
                                " seed=" + std::to_string(seed) + ": " + e.what();
                }
            }
        }
        if (c1) c1_detail = std::to_string(count) + " instances equal the Kruskal MST exactly";
        report(1, c1, c1_detail);
    }

    // criterion 2: MSF over masks and PWA folds, 50 instances
    {
        std::size_t count = 0;
        const char* aggs[] = {"min", "max", "sum", "xor"};
        for (std::uint64_t seed = 1; seed <= 50 && c2; ++seed) {
            std::uint32_t n = seed % 2 ? 64 : 128;
            WeightedGraph g = generate_graph(GraphFamily::RandomConnected, n, seed, 3);
            std::uint32_t parts = 2 + static_cast<std::uint32_t>(seed % 7);
            Partition part = generate_partition(g, parts, seed * 17);
            SubgraphMask mask = induced_mask(g, part);
            try {
                SolverConfig cfg;
                cfg.mode = Mode::Msf;
                cfg.assert_level = AssertLevel::Invariants;
                SolveResult res = solve_msf(g, cfg, &mask, &part);
                if (res.msf_edges != oracle_msf(g, &mask)) {
                    c2 = false;
                    c2_detail = "MSF mismatch at seed " + std::to_string(seed);
                    break;
                }
                runs.push_back(RunStats{n, g.edge_count(), std::move(res.metrics)});

                AggregationSpec agg = aggregation_by_name(aggs[seed % 4]);
                std::vector<std::uint64_t> inputs(n);
                Rng rng(seed * 31 + 1);
                for (auto& x : inputs) x = rng.below(1 << 16) + 1;
                SolverConfig pcfg;
                pcfg.assert_level = AssertLevel::Invariants;
                SolveResult pres = solve_pwa(g, pcfg, part, agg, inputs);
                std::map<std::uint32_t, std::uint64_t> fold;
                for (VertexId v = 0; v < n; ++v) {
                    auto it = fold.find(part.part_of[v]);
                    if (it == fold.end())
                        fold[part.part_of[v]] = inputs[v];
                    else
                        it->second = agg.combine(it->second, inputs[v]);
                }
                for (VertexId v = 0; v < n && c2; ++v)
                    if (pres.pwa_output[v] != fold[part.part_of[v]]) {
                        c2 = false;
                        c2_detail = "PWA mismatch at seed " + std::to_string(seed);
                    }
                runs.push_back(RunStats{n, g.edge_count(), std::move(pres.metrics)});
                ++count;
            } catch (const std::exception& e) {
                c2 = false;
                c2_detail = std::string("fault at seed ") + std::to_string(seed) + ": " + e.what();
            }
        }
        if (c2) c2_detail = std::to_string(count) + " mask/PWA instances match their oracles";
        report(2, c2, c2_detail);
    }

    // criterion 3: memory bound and fitted exponent over n = 64..4096
    {
        bool pass = true;
        std::vector<std::pair<double, double>> points; // (ln n, ln peak)
        std::string detail;
        // one density for all sizes, chosen so every size runs the full
        // two-part pipeline (base fragments, cycles, slot generation)
        for (std::uint32_t n : {64u, 256u, 1024u, 4096u}) {
            WeightedGraph g = generate_graph(GraphFamily::RandomConnected, n, 1, 2);
            SolverConfig cfg;
            cfg.assert_level = n <= 1024 ? AssertLevel::Invariants : AssertLevel::Off;
            try {
                SolveResult res = solve_msf(g, cfg);
                double b = std::ceil(log2d(n));
                double budget = 64.0 * b * b;
                if (static_cast<double>(res.metrics.peak_bits_global) > budget) {
                    pass = false;
                    detail = "peak " + std::to_string(res.metrics.peak_bits_global) +
                             " exceeds 64*ceil(log2 n)^2 at n=" + std::to_string(n);
                }
                points.push_back({std::log(double(n)), std::log(double(res.metrics.peak_bits_global))});
                detail += "n=" + std::to_string(n) + ":" +
                          std::to_string(res.metrics.peak_bits_global) + "b ";
            } catch (const std::exception& e) {
                pass = false;
                detail = std::string("fault at n=") + std::to_string(n) + ": " + e.what();
            }
        }
        double exponent = 0;
        if (points.size() >= 2) {
            // least-squares slope
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            for (auto [x, y] : points) {
                sx += x;
                sy += y;
                sxx += x * x;
                sxy += x * y;
            }
            double k = points.size();
            exponent = (k * sxy - sx * sy) / (k * sxx - sx * sx);
        }
        if (exponent > kMemExponent) pass = false;
        char buf[64];
        std::snprintf(buf, sizeof buf, "fitted exponent %.3f (cap %.1f) ", exponent, kMemExponent);
        report(3, pass, std::string(buf) + detail);
    }

    // criterion 4: zero multi-slot receptions anywhere
    {
        std::uint64_t total = 0;
        for (const auto& r : runs) total += r.metrics.congestion_violations;
        report(4, total == 0, std::to_string(total) + " congestion violations across all runs");
    }

    // criterion 5: per-cycle time bounds
    {
        bool pass = true;
        std::uint64_t cycles = 0;
        std::string detail;
        for (const auto& r : runs) {
            for (const auto& cyc : r.metrics.cycles) {
                ++cycles;
                std::uint64_t ext_cap = (2ull * cyc.d_t + cyc.max_slot) * cyc.w;
                std::uint64_t intr_cap = (cyc.d_b + 2ull) * cyc.w;
                bool ok = cyc.extrinsic_frame_rounds <= ext_cap;
                if (cyc.kind == CycleKind::Convergecast || cyc.kind == CycleKind::Broadcast)
                    ok = ok && cyc.intrinsic_frame_rounds <= intr_cap;
                if (!ok && pass) {
                    pass = false;
                    detail = "cycle exceeded its schedule (ext " +
                             std::to_string(cyc.extrinsic_frame_rounds) + " cap " +
                             std::to_string(ext_cap) + ")";
                }
            }
        }
        if (pass)
            detail = std::to_string(cycles) + " cycles within (2d(T)+K)W extrinsic + D_b intrinsic";
        report(5, pass, detail);
    }

    // criterion 6: frame bound with one pinned constant
    {
        bool pass = true;
        double worst = 0;
        for (const auto& r : runs) {
            double b = log2d(r.n);
            double budget = kFramesConst * (r.m * b + r.n * b * b);
            double ratio = r.metrics.frames_sent / (r.m * b + r.n * b * b);
            worst = std::max(worst, ratio);
            if (r.metrics.frames_sent > budget) pass = false;
        }
        char buf[96];
        std::snprintf(buf, sizeof buf, "fitted c = %.1f against pinned cap %.0f", worst, kFramesConst);
        report(6, pass, buf);
    }

    // criterion 7: round bound with one pinned constant
    {
        bool pass = true;
        double worst = 0;
        for (const auto& r : runs) {
            double b = log2d(r.n);
            double denom = (r.metrics.d_t + std::sqrt(double(r.n))) * b * b;
            double ratio = r.metrics.frame_rounds / denom;
            worst = std::max(worst, ratio);
            if (r.metrics.frame_rounds > kRoundsConst * denom) pass = false;
        }
        char buf[96];
        std::snprintf(buf, sizeof buf, "fitted c = %.1f against pinned cap %.0f", worst, kRoundsConst);
        report(7, pass, buf);
    }

    // criterion 8: slot sets validated after setup and every phase
    // (the invariant-level checkpoints throw on any violation, so reaching
    // this point with passing runs is the assertion; re-run one instance with
    // oracle-level checks for good measure)
    {
        bool pass = c1 && c2;
        std::string detail = "validate_slot_set enforced at every checkpoint of every run";
        try {
            WeightedGraph g = generate_graph(GraphFamily::RandomConnected, 256, 3, 4);
            SolverConfig cfg;
            cfg.assert_level = AssertLevel::Oracle;
            solve_msf(g, cfg);
        } catch (const std::exception& e) {
            pass = false;
            detail = e.what();
        }
        report(8, pass, detail);
    }

    // criterion 9: communication cycles per phase
    {
        std::uint32_t worst = 0;
        for (const auto& r : runs) worst = std::max(worst, r.metrics.max_cycles_per_phase);
        report(9, worst <= kCyclesPerPhase,
               "max cycles per phase " + std::to_string(worst) + " (cap " +
                   std::to_string(kCyclesPerPhase) + ")");
    }

    // criterion 10: routing delivers in exactly depth hops, sizes bounded
    {
        bool pass = true;
        std::string detail;
        for (std::uint32_t n : {64u, 256u, 1024u}) {
            WeightedGraph g = generate_graph(GraphFamily::RandomConnected, n, 2, 6);
            SolverConfig cfg;
            cfg.assert_level = AssertLevel::Off;
            Sim sim(g, cfg);
            build_bfs_tree(sim);
            setup_routing(sim);
            LabelCodec codec = sim.codec();
            std::uint32_t b = ceil_log2(n);
            for (VertexId dest = 0; dest < n && pass; ++dest) {
                VertexId cur = sim.glob.root;
                std::uint32_t hops = 0;
                while (true) {
                    RouteDecision rd = route_next_hop(sim.st[cur].table, sim.st[dest].self_label);
                    if (rd.deliver) break;
                    cur = g.neighbor(cur, rd.forward_port);
                    if (++hops > n) break;
                }
                if (cur != dest || hops != sim.st[dest].depth) {
                    pass = false;
                    detail = "routing failed at n=" + std::to_string(n) +
                             " dest=" + std::to_string(dest);
                }
                if (codec.label_bits(sim.st[dest].self_label) > kLabelConst * b * b ||
                    table_bits(sim.st[dest].table, n) > kTableConst * (b + 1)) {
                    pass = false;
                    detail = "label or table width over cap at n=" + std::to_string(n);
                }
            }
        }
        if (pass) detail = "all labels delivered in exactly d(v) hops; widths within caps";
        report(10, pass, detail);
    }

    // criterion 11: the root never holds more than one stored message
    {
        bool pass = true;
        std::uint64_t peak = 0;
        for (const auto& r : runs) {
            peak = std::max(peak, r.metrics.root_msg_peak_bits);
            if (r.metrics.root_msg_violations) pass = false;
        }
        report(11, pass,
               "zero stored-message violations; widest msg_T " + std::to_string(peak) + " bits");
    }

    // criterion 12: determinism
    {
        WeightedGraph g = generate_graph(GraphFamily::RandomConnected, 128, 9, 4);
        SolverConfig cfg;
        cfg.assert_level = AssertLevel::Invariants;
        auto a = solve_msf(g, cfg);
        auto b = solve_msf(g, cfg);
        bool pass = a.msf_edges == b.msf_edges &&
                    a.metrics.frame_rounds == b.metrics.frame_rounds &&
                    a.metrics.frames_sent == b.metrics.frames_sent &&
                    a.metrics.logical_messages_sent == b.metrics.logical_messages_sent &&
                    a.metrics.peak_bits_global == b.metrics.peak_bits_global;
        report(12, pass, pass ? "repeated runs are identical" : "runs diverged");
    }

    std::printf("%s (%d criterion failures)\n", failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL",
                failures);
    return failures == 0 ? 0 : 1;
}
