#include "congest/pwa.hpp"

#include <algorithm>
#include <map>

#include "congest/checks.hpp"
#include "congest/cycle.hpp"
#include "congest/phase1.hpp"
#include "congest/phase2.hpp"
#include "congest/slots.hpp"
#include "congest/spanning.hpp"

namespace congest {

AggregationSpec aggregation_by_name(const std::string& name) {
    AggregationSpec spec;
    spec.name = name;
    if (name == "min") {
        spec.identity = std::numeric_limits<std::uint64_t>::max();
        spec.combine = [](std::uint64_t a, std::uint64_t b) { return std::min(a, b); };
    } else if (name == "max") {
        spec.identity = 0;
        spec.combine = [](std::uint64_t a, std::uint64_t b) { return std::max(a, b); };
    } else if (name == "sum") {
        spec.identity = 0;
        spec.combine = [](std::uint64_t a, std::uint64_t b) { return a + b; };
    } else if (name == "xor") {
        spec.identity = 0;
        spec.combine = [](std::uint64_t a, std::uint64_t b) { return a ^ b; };
    } else {
        throw InputError("unknown aggregation: " + name);
    }
    return spec;
}

namespace {

void install_checkpoints(Sim& sim) {
    if (sim.cfg.assert_level == AssertLevel::Off) return;
    sim.checkpoint = [](Sim& s, const char* point, std::uint32_t idx) {
        std::string p(point);
        if (p == "p1_phase") {
            check_fragment_forest(s);
            check_growth(s, idx);
        } else if (p == "base") {
            check_fragment_forest(s);
            check_base_bounds(s);
            auto rep = validate_slot_set(s);
            if (!rep.ok) throw ProtocolFault("slot set invalid after setup: " + rep.violation);
        } else if (p == "discover") {
            check_replication(s);
            if (s.cfg.assert_level == AssertLevel::Oracle && s.glob.n <= s.cfg.oracle_size_cap)
                check_mwoe_truth(s);
        } else if (p == "attach") {
            check_replication(s);
            check_matching(s);
        } else if (p == "slots") {
            check_fragment_forest(s, false);
            check_edge_budget(s);
            auto rep = validate_slot_set(s);
            if (!rep.ok)
                throw ProtocolFault("slot set invalid after phase " + std::to_string(idx) + ": " +
                                    rep.violation);
        }
    };
}

void finish_metrics(Sim& sim) {
    sim.metrics.peak_bits_per_vertex = sim.engine.peaks_per_vertex();
    sim.metrics.peak_bits_global = sim.engine.global_peak_bits();
    sim.metrics.congestion_violations = sim.engine.congestion_violations();
    sim.metrics.d_t = sim.glob.d_t;
    sim.metrics.k_b = sim.glob.k_b;
    sim.metrics.d_b = sim.glob.d_b;
}

std::vector<std::uint32_t> collect_edges(const Sim& sim) {
    std::vector<std::uint32_t> out;
    for (VertexId v = 0; v < sim.glob.n; ++v)
        for (PortId p : sim.st[v].mst_ports) out.push_back(sim.g.edge_at(v, p));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// PWA over fragments with the final slot set, then small components locally
void run_pwa_tail(Sim& sim, const AggregationSpec& agg) {
    sim.stage = Stage::Finish;
    if (sim.glob.k_b > 0) {
        ConvCycle conv;
        conv.name = "pwa_conv";
        conv.agg = Agg::User;
        conv.user = agg.combine;
        conv.input = [&](VertexId v) {
            const SolVertex& s = sim.st[v];
            if (s.small_component) return CycleValue{};
            return CycleValue{s.pwa_input, 0, true};
        };
        conv.deliver = [&](VertexId leader, const CycleValue& val, const RoutingLabel*) {
            SolVertex& s = sim.st[leader];
            s.vx_x = val.x;
            s.vx_valid = true;
        };
        run_convergecast_cycle(sim, conv);

        BcastCycle bc;
        bc.name = "pwa_bcast";
        bc.publish = [&](VertexId leader) -> CycleValue {
            const SolVertex& s = sim.st[leader];
            if (!s.vx_valid) return CycleValue{};
            return CycleValue{s.vx_x, 0, true};
        };
        bc.on_receive = [&](VertexId v, const CycleValue& val, const RoutingLabel*) {
            SolVertex& s = sim.st[v];
            s.pwa_output = val.x;
            s.pwa_done = true;
        };
        run_broadcast_cycle(sim, bc);
        for (VertexId v = 0; v < sim.glob.n; ++v) {
            SolVertex& s = sim.st[v];
            if (s.vx_valid) {
                s.vx_x = 0;
                s.vx_valid = false;
            }
            account(sim, v);
        }
    }

    // small components: convergecast then broadcast over their own trees
    auto& st = sim.st;
    tree_convergecast(
        sim, TreeView::Base, Agg::User,
        [&](VertexId v) {
            const SolVertex& s = st[v];
            if (!s.small_component) return CycleValue{};
            return CycleValue{s.pwa_input, 0, true};
        },
        [&](VertexId root, const CycleValue& val) {
            if (!st[root].small_component || !val.has) return;
            st[root].vx_x = val.x;
            st[root].vx_valid = true;
        },
        agg.combine);
    tree_broadcast(
        sim, TreeView::Base,
        [&](VertexId v) -> std::optional<std::uint64_t> {
            const SolVertex& s = st[v];
            if (s.small_component && s.vx_valid) return s.vx_x;
            return std::nullopt;
        },
        [&](VertexId v, std::uint64_t payload) {
            st[v].pwa_output = payload;
            st[v].pwa_done = true;
        });
    for (VertexId v = 0; v < sim.glob.n; ++v) {
        if (st[v].vx_valid) {
            st[v].vx_x = 0;
            st[v].vx_valid = false;
        }
        account(sim, v);
    }
}

} // namespace

void run_setup(Sim& sim) {
    install_checkpoints(sim);
    build_bfs_tree(sim);
    compute_cycle_widths(sim);
    setup_routing(sim);
    form_base_fragments(sim);
    assign_initial_slots(sim);
    broadcast_slot_bound(sim);
    broadcast_leader_info(sim);
    if (sim.checkpoint) sim.checkpoint(sim, "base", 0);
}

SolveResult solve_msf(const WeightedGraph& g, SolverConfig cfg, const SubgraphMask* mask,
                      const Partition* part_for_mask) {
    if (mask && cfg.mode == Mode::Mst) cfg.mode = Mode::Msf;
    Sim sim(g, cfg);
    sim.mask = mask;
    if (part_for_mask) {
        sim.part = part_for_mask;
        for (VertexId v = 0; v < g.vertex_count(); ++v) sim.st[v].part_id = part_for_mask->part_of[v];
    }
    run_setup(sim);
    run_second_part(sim);
    finish_metrics(sim);

    SolveResult res;
    res.msf_edges = collect_edges(sim);
    res.metrics = std::move(sim.metrics);
    res.reception_trace = std::move(sim.reception_trace);
    if (cfg.assert_level == AssertLevel::Oracle && g.vertex_count() <= cfg.oracle_size_cap) {
        auto want = oracle_msf(g, mask);
        if (want != res.msf_edges) throw ProtocolFault("distributed MSF differs from the oracle");
    }
    return res;
}

SolveResult solve_pwa(const WeightedGraph& g, SolverConfig cfg, const Partition& part,
                      const AggregationSpec& agg, const std::vector<std::uint64_t>& inputs) {
    cfg.mode = Mode::Pwa;
    if (inputs.size() != g.vertex_count()) throw InputError("one input per vertex required");
    validate_partition(g, part);
    Sim sim(g, cfg);
    sim.part = &part;
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
        sim.st[v].part_id = part.part_of[v];
        sim.st[v].pwa_input = inputs[v];
        account(sim, v);
    }
    run_setup(sim);
    run_second_part(sim);
    run_pwa_tail(sim, agg);
    finish_metrics(sim);

    SolveResult res;
    res.msf_edges = collect_edges(sim);
    res.pwa_output.resize(g.vertex_count());
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
        if (!sim.st[v].pwa_done) throw ProtocolFault("vertex missed its aggregate");
        res.pwa_output[v] = sim.st[v].pwa_output;
    }
    res.metrics = std::move(sim.metrics);
    res.reception_trace = std::move(sim.reception_trace);
    if (cfg.assert_level == AssertLevel::Oracle && g.vertex_count() <= cfg.oracle_size_cap) {
        std::map<std::uint32_t, std::uint64_t> fold;
        for (VertexId v = 0; v < g.vertex_count(); ++v) {
            auto it = fold.find(part.part_of[v]);
            if (it == fold.end())
                fold[part.part_of[v]] = inputs[v];
            else
                it->second = agg.combine(it->second, inputs[v]);
        }
        for (VertexId v = 0; v < g.vertex_count(); ++v)
            if (res.pwa_output[v] != fold[part.part_of[v]])
                throw ProtocolFault("PWA output differs from the centralized fold");
    }
    return res;
}

} // namespace congest
