// Command-line front end: run simulations, generate graphs, aggregate metrics.
#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "congest/graph.hpp"
#include "congest/pwa.hpp"

namespace {

using namespace congest;

struct GenSpec {
    GraphFamily family;
    std::uint32_t n = 0;
    std::uint64_t seed = 1;
    std::uint32_t extra = 3;
};

GenSpec parse_gen(const std::string& text) {
    GenSpec out;
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() < 2) throw InputError("generator spec is family:n[:seed[:extra]]");
    out.family = parse_family(parts[0]);
    out.n = static_cast<std::uint32_t>(std::stoul(parts[1]));
    if (parts.size() > 2) out.seed = std::stoull(parts[2]);
    if (parts.size() > 3) out.extra = static_cast<std::uint32_t>(std::stoul(parts[3]));
    return out;
}

int cmd_run(const std::string& mode, const std::string& graph_file, const std::string& gen,
            const std::string& part_file, const std::string& agg_name, const std::string& out_file,
            const std::string& metrics_file, const std::string& trace_file, const std::string& assert_lv,
            std::uint32_t cw, std::uint32_t cm, std::uint64_t round_cap, std::uint64_t seed_override) {
    SolverConfig cfg;
    cfg.engine.word_constant = cw;
    cfg.engine.memory_constant = cm;
    if (round_cap) cfg.engine.macro_round_cap = round_cap;
    if (assert_lv == "off")
        cfg.assert_level = AssertLevel::Off;
    else if (assert_lv == "invariants")
        cfg.assert_level = AssertLevel::Invariants;
    else if (assert_lv == "oracle")
        cfg.assert_level = AssertLevel::Oracle;
    else
        throw InputError("assert level must be off|invariants|oracle");
    cfg.collect_reception_trace = !trace_file.empty();

    std::unique_ptr<WeightedGraph> g;
    if (!gen.empty()) {
        GenSpec gs = parse_gen(gen);
        if (seed_override) gs.seed = seed_override;
        g = std::make_unique<WeightedGraph>(generate_graph(gs.family, gs.n, gs.seed, gs.extra));
    } else if (!graph_file.empty()) {
        g = std::make_unique<WeightedGraph>(load_graph(graph_file, mode != "msf"));
    } else {
        throw InputError("either --graph or --gen is required");
    }
    if (cfg.assert_level == AssertLevel::Oracle && g->vertex_count() > cfg.oracle_size_cap)
        throw InputError("oracle assertions are capped at n <= " + std::to_string(cfg.oracle_size_cap));

    std::unique_ptr<Partition> part;
    if (!part_file.empty()) part = std::make_unique<Partition>(load_partition(part_file, *g));

    SolveResult res;
    if (mode == "mst") {
        cfg.mode = Mode::Mst;
        res = solve_msf(*g, cfg);
    } else if (mode == "msf") {
        cfg.mode = Mode::Msf;
        if (!part) throw InputError("msf mode needs --partition to derive the subgraph mask");
        SubgraphMask mask = induced_mask(*g, *part);
        res = solve_msf(*g, cfg, &mask, part.get());
    } else if (mode == "pwa") {
        cfg.mode = Mode::Pwa;
        if (!part) throw InputError("pwa mode needs --partition");
        AggregationSpec agg = aggregation_by_name(agg_name);
        std::vector<std::uint64_t> inputs(g->vertex_count());
        for (VertexId v = 0; v < g->vertex_count(); ++v) inputs[v] = v + 1;
        res = solve_pwa(*g, cfg, *part, agg, inputs);
    } else {
        throw InputError("mode must be mst|msf|pwa");
    }

    if (!out_file.empty()) {
        std::ofstream out(out_file);
        if (!out) throw InputError("cannot open " + out_file);
        if (mode == "pwa") {
            for (VertexId v = 0; v < g->vertex_count(); ++v)
                out << (v + 1) << " " << res.pwa_output[v] << "\n";
        } else {
            for (auto e : res.msf_edges)
                out << (g->edge(e).u + 1) << " " << (g->edge(e).v + 1) << " " << g->edge(e).weight
                    << "\n";
        }
    }
    if (!metrics_file.empty()) write_metrics_csv(res.metrics, metrics_file);
    if (!trace_file.empty()) {
        // per-round slot ownership, enough to re-check the separation claim offline
        nlohmann::json j;
        auto arr = nlohmann::json::array();
        for (const auto& ev : res.reception_trace)
            arr.push_back({{"round", ev.round}, {"vertex", ev.vertex}, {"slot", ev.slot}});
        j["receptions"] = std::move(arr);
        std::ofstream out(trace_file);
        out << j.dump() << "\n";
    }

    std::cout << "n=" << res.metrics.n << " m=" << res.metrics.m << " d_t=" << res.metrics.d_t
              << " k_b=" << res.metrics.k_b << " rounds=" << res.metrics.frame_rounds
              << " frames=" << res.metrics.frames_sent << " peak_bits=" << res.metrics.peak_bits_global
              << " cycles=" << res.metrics.cycles_total << "\n";
    if (mode != "pwa") std::cout << "edges=" << res.msf_edges.size() << "\n";
    return 0;
}

int cmd_gen(const std::string& gen, const std::string& out_file) {
    GenSpec gs = parse_gen(gen);
    WeightedGraph g = generate_graph(gs.family, gs.n, gs.seed, gs.extra);
    write_graph(g, out_file);
    std::cout << "wrote " << out_file << " n=" << g.vertex_count() << " m=" << g.edge_count() << "\n";
    return 0;
}

struct ReportRow {
    std::uint32_t n = 0, d_t = 0, k_b = 0;
    std::uint64_t rounds = 0, frames = 0, peak = 0;
};

int cmd_report(const std::vector<std::string>& files) {
    std::vector<ReportRow> rows;
    for (const auto& f : files) {
        std::ifstream in(f);
        if (!in) throw InputError("cannot open " + f);
        std::string line;
        ReportRow row;
        while (std::getline(in, line)) {
            if (line.rfind("total,", 0) == 0) {
                std::stringstream ss(line);
                std::string tok;
                std::getline(ss, tok, ','); // total
                std::getline(ss, tok, ',');
                row.rounds = std::stoull(tok);
                std::getline(ss, tok, ',');
                row.frames = std::stoull(tok);
                std::getline(ss, tok, ','); // logical
                std::getline(ss, tok, ',');
                row.peak = std::stoull(tok);
            } else if (line.rfind("# n=", 0) == 0) {
                std::stringstream ss(line);
                std::string tok;
                while (ss >> tok) {
                    auto eq = tok.find('=');
                    if (eq == std::string::npos) continue;
                    std::string key = tok.substr(0, eq);
                    std::uint64_t val = std::stoull(tok.substr(eq + 1));
                    if (key == "n") row.n = static_cast<std::uint32_t>(val);
                    if (key == "d_t") row.d_t = static_cast<std::uint32_t>(val);
                    if (key == "k_b") row.k_b = static_cast<std::uint32_t>(val);
                }
            }
        }
        rows.push_back(row);
    }
    std::sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) { return a.n < b.n; });
    std::cout << "n,d_t,k_b,rounds,frames,peak_bits\n";
    for (const auto& r : rows)
        std::cout << r.n << "," << r.d_t << "," << r.k_b << "," << r.rounds << "," << r.frames << ","
                  << r.peak << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"CONGEST-model MST/MSF/PWA simulator"};
    app.require_subcommand(1);

    std::string mode = "mst", graph_file, gen, part_file, agg_name = "min";
    std::string out_file, metrics_file, trace_file, assert_lv = "invariants";
    std::uint32_t cw = 4, cm = 64;
    std::uint64_t round_cap = 0;

    auto* run = app.add_subcommand("run", "run a simulation");
    run->add_option("--mode", mode, "mst|msf|pwa");
    run->add_option("--graph", graph_file, "edge-list file");
    run->add_option("--gen", gen, "generator family:n[:seed[:extra]]");
    run->add_option("--partition", part_file, "partition file (msf mask / pwa parts)");
    run->add_option("--agg", agg_name, "pwa aggregation: min|max|sum|xor");
    run->add_option("--out", out_file, "result file");
    run->add_option("--metrics", metrics_file, "metrics CSV");
    run->add_option("--trace", trace_file, "opt-in JSON reception trace");
    run->add_option("--assert", assert_lv, "off|invariants|oracle");
    run->add_option("--word-constant", cw, "word bits = c_w * ceil(log2 n)");
    run->add_option("--memory-constant", cm, "budget = c_m * ceil(log2 n)^2");
    run->add_option("--round-cap", round_cap, "macro-round cap per phase");

    std::string gen_out = "graph.txt";
    auto* geng = app.add_subcommand("gen-graph", "write a generated graph");
    geng->add_option("--gen", gen, "generator family:n[:seed[:extra]]")->required();
    geng->add_option("--out", gen_out, "output file");

    std::vector<std::string> report_files;
    auto* rep = app.add_subcommand("report", "aggregate metrics CSVs into a scaling table");
    rep->add_option("files", report_files, "metrics CSV files")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        std::uint64_t seed_override = 0;
        if (const char* env = std::getenv("CONGEST_MST_SEED")) seed_override = std::stoull(env);
        if (run->parsed())
            return cmd_run(mode, graph_file, gen, part_file, agg_name, out_file, metrics_file,
                           trace_file, assert_lv, cw, cm, round_cap, seed_override);
        if (geng->parsed()) return cmd_gen(gen, gen_out);
        if (rep->parsed()) return cmd_report(report_files);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
