#include "congest/phase1.hpp"

#include <algorithm>
#include <deque>

namespace congest {

namespace {

constexpr std::uint64_t kPinFragTree = 3;

std::uint32_t wb_id(const Sim& sim, std::uint32_t ids, std::uint32_t extra = 0) {
    return kTagBits + ids * sim.glob.id_bits + extra;
}
std::uint32_t wb_rank(const Sim& sim, std::uint32_t extra = 0) {
    return kTagBits + sim.glob.rank_bits + extra;
}

// H-membership of the edge behind a probe exchange: with a stored mask the
// recording endpoint speaks for the edge; in PWA mode equal part ids decide;
// otherwise every edge counts.
bool probe_edge_in_h(const Sim& sim, VertexId v, PortId p, const Msg& their_probe) {
    if (sim.mask) {
        bool mine = sim.mask->recorded_by[v][p];
        bool theirs = (their_probe.c & 1) != 0;
        return mine || theirs;
    }
    if (sim.cfg.mode == Mode::Pwa) return their_probe.b == sim.st[v].part_id;
    return true;
}

void clear_phase_tmp(Sim& sim) {
    for (VertexId v = 0; v < sim.glob.n; ++v) {
        SolVertex& s = sim.st[v];
        s.participating = false;
        s.diam_reports = 0;
        s.h1 = s.h2 = 0;
        s.diam_below = 0;
        s.local_cand = Cand{};
        s.best_cand = Cand{};
        s.retrace_port = kNoPort;
        s.cand_reports = 0;
        s.notified_vadj = false;
        s.reoriented = false;
        s.req_noticed = false;
        account(sim, v);
    }
}

// exact tree diameter at each fragment root, then the participation gate
void phase_gate(Sim& sim, std::uint32_t phase_index, MergeMode mode) {
    auto& st = sim.st;
    std::uint64_t gate = 1ull << phase_index;
    PhaseConfig pc;
    pc.name = "p1_gate";
    pc.frames_per_macro = words_for(sim, wb_id(sim, 2, 4));
    sim.run(pc, [&](Env& env) {
        SolVertex& s = st[env.id()];
        if (s.terminated) return;
        // h1/h2 hold the two largest child heights + 1 ("lifted")
        auto send_or_decide = [&]() {
            std::uint32_t height = s.h1;
            std::uint32_t diam = std::max(s.diam_below, s.h1 + s.h2);
            if (s.frag_has_parent) {
                env.send(s.frag_parent_port,
                         make_msg(MsgKind::TreeUp, wb_id(sim, 2, 4), height, diam, kPinFragTree));
            } else {
                bool participate = mode == MergeMode::Ghs || diam <= gate;
                s.participating = participate;
                for (PortId p = 0; p < env.degree(); ++p) {
                    const Msg* pin = env.buffered(p);
                    if (pin && pin->kind == MsgKind::TreeUp && pin->c == kPinFragTree)
                        env.send(p, make_msg(MsgKind::TreeDown, kTagBits + 1, participate ? 1 : 0));
                }
            }
            account(sim, env.id());
        };
        if (env.round() == 1 && s.frag_child_count == 0) {
            send_or_decide();
            return;
        }
        for (PortId p : env.arrivals()) {
            const Msg* m = env.arrived(p);
            if (!m) continue;
            if (m->kind == MsgKind::TreeUp) {
                std::uint32_t lifted = static_cast<std::uint32_t>(m->a) + 1;
                if (lifted > s.h1) {
                    s.h2 = s.h1;
                    s.h1 = lifted;
                } else if (lifted > s.h2) {
                    s.h2 = lifted;
                }
                s.diam_below = std::max(s.diam_below, static_cast<std::uint32_t>(m->b));
                ++s.diam_reports;
                if (s.diam_reports == s.frag_child_count) send_or_decide();
            } else if (m->kind == MsgKind::TreeDown) {
                s.participating = m->a != 0;
                for (PortId q = 0; q < env.degree(); ++q) {
                    const Msg* pin = env.buffered(q);
                    if (pin && pin->kind == MsgKind::TreeUp && pin->c == kPinFragTree)
                        env.send(q, make_msg(MsgKind::TreeDown, kTagBits + 1, m->a));
                }
                account(sim, env.id());
            }
        }
    });
}

// every vertex announces (fragment id, part id, mask bit) on every port,
// then picks its lightest cross-fragment candidate
void phase_probe(Sim& sim) {
    auto& st = sim.st;
    PhaseConfig pc;
    pc.name = "p1_probe";
    pc.frames_per_macro = words_for(sim, wb_id(sim, 2, 2));
    pc.fixed_macro_rounds = 2;
    sim.run(pc, [&](Env& env) {
        SolVertex& s = st[env.id()];
        if (env.round() == 1) {
            for (PortId p = 0; p < env.degree(); ++p) {
                std::uint64_t flags = 0;
                if (sim.mask && sim.mask->recorded_by[env.id()][p]) flags |= 1;
                env.send(p, make_msg(MsgKind::Probe, wb_id(sim, 2, 2), s.frag_id, s.part_id, flags));
            }
            return;
        }
        for (PortId p : env.arrivals()) {
            const Msg* m = env.arrived(p);
            if (!m || m->kind != MsgKind::Probe) continue;
            if (m->a == s.frag_id) continue;
            if (!probe_edge_in_h(sim, env.id(), p, *m)) continue;
            WeightRank r = env.rank_at(p);
            if (!s.local_cand.valid() || r < s.local_cand.rank) {
                s.local_cand = Cand{r, p, m->a};
            }
        }
        account(sim, env.id());
    });
}

// per-fragment minimum with retrace pointers; the root then notifies the
// MWOE-adjacent vertex (or floods termination)
void phase_mwoe(Sim& sim) {
    auto& st = sim.st;
    PhaseConfig pc;
    pc.name = "p1_mwoe";
    pc.frames_per_macro = words_for(sim, wb_rank(sim, 4));
    sim.run(pc, [&](Env& env) {
        SolVertex& s = st[env.id()];
        if (s.terminated || !s.participating) return;
        auto fold_own = [&]() {
            if (s.local_cand.valid() &&
                (!s.best_cand.valid() || s.local_cand.rank < s.best_cand.rank)) {
                s.best_cand = s.local_cand;
                s.retrace_port = kNoPort; // the winner is our own port
            }
        };
        auto finish = [&]() {
            fold_own();
            if (s.frag_has_parent) {
                // rank 0 marks "no candidate below" (real ranks start at 1)
                env.send(s.frag_parent_port,
                         make_msg(MsgKind::CandUp, wb_rank(sim, 4),
                                  s.best_cand.valid() ? s.best_cand.rank : 0, kPinFragTree));
            } else if (!s.best_cand.valid()) {
                // no outgoing candidate: the fragment spans its component
                s.terminated = true;
                for (PortId p = 0; p < env.degree(); ++p) {
                    const Msg* pin = env.buffered(p);
                    if (pin && pin->kind == MsgKind::CandUp && pin->b == kPinFragTree)
                        env.send(p, make_msg(MsgKind::FragDown, wb_rank(sim, 1), 1, 0));
                }
            } else if (s.retrace_port == kNoPort) {
                s.notified_vadj = true;
                s.mst_ports.push_back(s.local_cand.port);
            } else {
                env.send(s.retrace_port,
                         make_msg(MsgKind::FragDown, wb_rank(sim, 1), 0, s.best_cand.rank));
            }
            account(sim, env.id());
        };
        if (env.round() == 1 && s.frag_child_count == 0) {
            finish();
            return;
        }
        for (PortId p : env.arrivals()) {
            const Msg* m = env.arrived(p);
            if (!m) continue;
            if (m->kind == MsgKind::CandUp) {
                if (m->a != 0 && (!s.best_cand.valid() || m->a < s.best_cand.rank)) {
                    s.best_cand = Cand{m->a, kNoPort, kNoValue};
                    s.retrace_port = p;
                }
                ++s.cand_reports;
                if (s.cand_reports == s.frag_child_count) finish();
            } else if (m->kind == MsgKind::FragDown) {
                if (m->a == 1) { // termination flood
                    s.terminated = true;
                    for (PortId q = 0; q < env.degree(); ++q) {
                        const Msg* pin = env.buffered(q);
                        if (pin && pin->kind == MsgKind::CandUp && pin->b == kPinFragTree)
                            env.send(q, make_msg(MsgKind::FragDown, wb_rank(sim, 1), 1, 0));
                    }
                } else if (s.local_cand.valid() && s.local_cand.rank == m->b) {
                    s.notified_vadj = true;
                    s.mst_ports.push_back(s.local_cand.port);
                } else {
                    if (s.retrace_port == kNoPort)
                        throw ProtocolFault("retrace lost at vertex " + std::to_string(env.id()));
                    env.send(s.retrace_port, make_msg(MsgKind::FragDown, wb_rank(sim, 1), 0, m->b));
                }
                account(sim, env.id());
            }
        }
    });
}

// pins, merge requests, mutual detection, new-id floods, child census
void phase_merge(Sim& sim) {
    auto& st = sim.st;
    PhaseConfig pc;
    pc.name = "p1_merge";
    pc.frames_per_macro = words_for(sim, wb_id(sim, 1, 4));

    auto tree_ports = [&](VertexId v) {
        std::vector<PortId> out = st[v].mst_ports;
        if (st[v].frag_has_parent) out.push_back(st[v].frag_parent_port);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    };

    sim.run(pc, [&](Env& env) {
        SolVertex& s = st[env.id()];
        if (s.terminated && env.round() == 1) return;
        std::uint64_t r = env.round();
        auto flood_new_id = [&](std::uint64_t new_id, PortId arrival) {
            PortId old_parent = s.frag_has_parent ? s.frag_parent_port : kNoPort;
            s.reoriented = true;
            s.frag_child_count = 0;
            if (arrival == kNoPort) {
                s.frag_has_parent = false;
                s.frag_parent_port = kNoPort;
            } else if (new_id != s.frag_id) {
                s.frag_has_parent = true;
                s.frag_parent_port = arrival;
            }
            s.frag_id = new_id;
            std::vector<PortId> targets = st[env.id()].mst_ports;
            if (old_parent != kNoPort) targets.push_back(old_parent);
            for (PortId p = 0; p < env.degree(); ++p) {
                const Msg* pin = env.buffered(p);
                if (pin &&
                    (pin->kind == MsgKind::TreePin || pin->kind == MsgKind::MergeReq ||
                     pin->kind == MsgKind::ReqNotice) &&
                    pin->a == kPinFragTree)
                    targets.push_back(p);
            }
            std::sort(targets.begin(), targets.end());
            targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
            for (PortId p : targets)
                if (p != arrival) env.send(p, make_msg(MsgKind::NewId, wb_id(sim, 1), new_id));
            if (s.frag_has_parent)
                env.send(s.frag_parent_port, make_msg(MsgKind::ChildPing, kTagBits + 1));
            account(sim, env.id());
        };

        if (r == 1) {
            for (PortId p : tree_ports(env.id()))
                env.send(p, make_msg(MsgKind::TreePin, kTagBits + 4, kPinFragTree));
            if (s.notified_vadj) env.wake_at(2);
            return;
        }
        if (r == 2 && s.notified_vadj) {
            env.send(s.local_cand.port,
                     make_msg(MsgKind::MergeReq, wb_id(sim, 1, 4), kPinFragTree, s.frag_id));
            env.wake_at(3);
            return;
        }
        if (r == 3 && s.notified_vadj) {
            const Msg* back = env.buffered(s.local_cand.port);
            bool mutual = back && back->kind == MsgKind::MergeReq && back->a == kPinFragTree;
            if (mutual && s.frag_id > back->b) {
                // doubly-discovered MWOE; the larger fragment id takes the root
                flood_new_id(env.id() + 1, kNoPort);
                return;
            }
        }
        // floods first: once reoriented, pinned requests are already served
        // and the upward notice wave is moot
        for (PortId p : env.arrivals()) {
            const Msg* m = env.arrived(p);
            if (!m) continue;
            if (m->kind == MsgKind::NewId) {
                if (!s.reoriented) flood_new_id(m->a, p);
            } else if (m->kind == MsgKind::ChildPing) {
                ++s.frag_child_count;
                account(sim, env.id());
            }
        }
        for (PortId p : env.arrivals()) {
            const Msg* m = env.arrived(p);
            if (!m || s.reoriented || s.req_noticed) continue;
            bool sink_request = m->kind == MsgKind::MergeReq && !s.participating && !s.terminated;
            if (sink_request || m->kind == MsgKind::ReqNotice) {
                s.req_noticed = true;
                if (s.frag_has_parent) {
                    env.send(s.frag_parent_port,
                             make_msg(MsgKind::ReqNotice, kTagBits + 4, kPinFragTree));
                } else {
                    flood_new_id(s.frag_id, kNoPort);
                }
            }
        }
    });
}

} // namespace

void run_fragment_phase(Sim& sim, std::uint32_t phase_index, MergeMode mode) {
    clear_phase_tmp(sim);
    if (mode == MergeMode::Lenzen) {
        phase_gate(sim, phase_index, mode);
    } else {
        for (VertexId v = 0; v < sim.glob.n; ++v)
            if (!sim.st[v].terminated) sim.st[v].participating = true;
    }
    phase_probe(sim);
    phase_mwoe(sim);
    phase_merge(sim);
}

void form_base_fragments(Sim& sim) {
    sim.stage = Stage::Phase1;
    // singleton fragments; fragment id = root vertex id (1-based)
    for (VertexId v = 0; v < sim.glob.n; ++v) {
        SolVertex& s = sim.st[v];
        s.frag_id = v + 1;
        s.frag_has_parent = false;
        s.frag_parent_port = kNoPort;
        s.frag_child_count = 0;
        account(sim, v);
    }
    std::uint32_t k = std::max<std::uint32_t>(
        sim.glob.d_t, static_cast<std::uint32_t>(isqrt_floor(sim.glob.n)) +
                          ((isqrt_floor(sim.glob.n) * isqrt_floor(sim.glob.n) < sim.glob.n) ? 1 : 0));
    sim.glob.k_threshold = std::max(k, 1u);
    std::uint32_t phases = std::max<std::uint32_t>(ceil_log2(sim.glob.k_threshold), 1);
    sim.metrics.phase1_count = phases;
    for (std::uint32_t i = 1; i <= phases; ++i) {
        run_fragment_phase(sim, i, MergeMode::Lenzen);
        if (sim.checkpoint) sim.checkpoint(sim, "p1_phase", i);
    }

    // freeze base fragments; phase-1 terminations become small components
    std::uint32_t d_b = 0;
    for (VertexId v = 0; v < sim.glob.n; ++v) {
        SolVertex& s = sim.st[v];
        s.base_id = s.frag_id;
        s.base_root = !s.frag_has_parent;
        s.base_parent_port = s.frag_parent_port;
        s.base_child_count = s.frag_child_count;
        s.small_component = s.terminated;
        account(sim, v);
    }
    // measured tree depths (orchestrator-side bookkeeping)
    {
        std::vector<std::uint32_t> depth(sim.glob.n, 0);
        std::vector<std::vector<VertexId>> kids(sim.glob.n);
        std::deque<VertexId> q;
        for (VertexId v = 0; v < sim.glob.n; ++v) {
            if (sim.st[v].base_parent_port != kNoPort)
                kids[sim.g.neighbor(v, sim.st[v].base_parent_port)].push_back(v);
            else
                q.push_back(v);
        }
        while (!q.empty()) {
            VertexId v = q.front();
            q.pop_front();
            if (!sim.st[v].small_component) d_b = std::max(d_b, depth[v]);
            for (VertexId c : kids[v]) {
                depth[c] = depth[v] + 1;
                q.push_back(c);
            }
        }
    }
    sim.glob.d_b = d_b;
    clear_phase_tmp(sim);
}

} // namespace congest
