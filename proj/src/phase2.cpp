#include "congest/phase2.hpp"

#include <algorithm>

#include "congest/cycle.hpp"
#include "congest/slots.hpp"
#include "congest/spanning.hpp"

namespace congest {

namespace {

constexpr std::uint64_t kChildPing = 1;
constexpr std::uint64_t kPropose = 2;
constexpr std::uint64_t kSubtreeMark = 3;

std::uint32_t vbw(const Sim& sim) { return std::max(sim.glob.rank_bits, sim.glob.id_bits); }
std::uint32_t w_ids(const Sim& sim, std::uint32_t ids, std::uint32_t extra = 0) {
    return kTagBits + ids * sim.glob.id_bits + extra;
}
std::uint32_t w_vals(const Sim& sim, std::uint32_t vals, std::uint32_t extra = 0) {
    return kTagBits + vals * vbw(sim) + extra;
}

bool frag_active(const SolVertex& s) { return !s.small_component && !s.terminated; }

bool probe_edge_in_h(const Sim& sim, VertexId v, PortId p, const Msg& their_probe) {
    if (sim.mask) {
        bool mine = sim.mask->recorded_by[v][p];
        bool theirs = (their_probe.c & 1) != 0;
        return mine || theirs;
    }
    if (sim.cfg.mode == Mode::Pwa) return their_probe.b == sim.st[v].part_id;
    return true;
}

void clear_virt_state(Sim& sim) {
    for (VertexId v = 0; v < sim.glob.n; ++v) {
        SolVertex& s = sim.st[v];
        s.local_cand = Cand{};
        s.best_cand = Cand{};
        s.retrace_port = kNoPort;
        s.cand_reports = 0;
        s.color = 0;
        s.parent_color = 0;
        s.pre_shift_color = 0;
        s.matched = false;
        s.partner = kNoValue;
        s.vparent = kNoValue;
        s.is_virtual_root = false;
        s.subtree_parent = kNoValue;
        s.is_subtree_root = false;
        s.subtree_depth_of_frag = 0;
        s.parent_matched = false;
        s.parent_winner = false;
        s.matched_child = kNoValue;
        s.matched_child_winner = false;
        s.is_vadj = false;
        s.mwoe_port = kNoPort;
        s.mwoe_rank = kNoValue;
        s.subtree_parent_port = kNoPort;
        s.vx_x = s.vx_y = 0;
        s.vx_valid = false;
        account(sim, v);
    }
}

void probe_round(Sim& sim) {
    auto& st = sim.st;
    PhaseConfig pc;
    pc.name = "ph2_probe";
    pc.frames_per_macro = words_for(sim, w_ids(sim, 2, 2));
    pc.fixed_macro_rounds = 2;
    sim.run(pc, [&](Env& env) {
        SolVertex& s = st[env.id()];
        if (env.round() == 1) {
            for (PortId p = 0; p < env.degree(); ++p) {
                std::uint64_t flags = 0;
                if (sim.mask && sim.mask->recorded_by[env.id()][p]) flags |= 1;
                env.send(p, make_msg(MsgKind::Probe, w_ids(sim, 2, 2), s.frag_id, s.part_id, flags));
            }
            return;
        }
        if (!frag_active(s)) return;
        for (PortId p : env.arrivals()) {
            const Msg* m = env.arrived(p);
            if (!m || m->kind != MsgKind::Probe) continue;
            if (m->a == s.frag_id) continue;
            if (!probe_edge_in_h(sim, env.id(), p, *m)) continue;
            WeightRank r = env.rank_at(p);
            if (!s.local_cand.valid() || r < s.local_cand.rank) s.local_cand = Cand{r, p, m->a};
        }
        account(sim, env.id());
    });
}

// active-fragment count at r_T, verdict flooded back over T
std::uint64_t status_count(Sim& sim) {
    auto& st = sim.st;
    std::uint64_t count_at_root = 0;
    PhaseConfig pc;
    pc.name = "ph2_status";
    pc.frames_per_macro = words_for(sim, w_ids(sim, 1, 4));
    sim.run(pc, [&](Env& env) {
        SolVertex& s = st[env.id()];
        auto inject = [&]() -> std::uint64_t {
            return (s.is_leader && frag_active(s)) ? 1 : 0;
        };
        auto finish = [&](std::uint64_t sum) {
            if (s.parent_port == kNoPort) {
                count_at_root = sum;
                for (PortId p = 0; p < env.degree(); ++p) {
                    const Msg* pin = env.buffered(p);
                    if (pin && pin->kind == MsgKind::TreeUp && pin->c == 9)
                        env.send(p, make_msg(MsgKind::TreeDown, kTagBits + 5, sum == 0 ? 1 : 0, 9));
                }
            } else {
                env.send(s.parent_port, make_msg(MsgKind::TreeUp, w_ids(sim, 1, 4), sum, 0, 9));
            }
        };
        if (env.round() == 1) {
            if (s.child_count == 0) finish(inject());
            return;
        }
        for (PortId p : env.arrivals()) {
            const Msg* m = env.arrived(p);
            if (!m) continue;
            if (m->kind == MsgKind::TreeUp && m->c == 9) {
                s.vx_x += m->a;
                ++s.cand_reports;
                if (s.cand_reports == s.child_count) {
                    std::uint64_t sum = s.vx_x + inject();
                    s.vx_x = 0;
                    s.cand_reports = 0;
                    finish(sum);
                }
            } else if (m->kind == MsgKind::TreeDown && m->b == 9) {
                for (PortId q = 0; q < env.degree(); ++q) {
                    const Msg* pin = env.buffered(q);
                    if (pin && pin->kind == MsgKind::TreeUp && pin->c == 9)
                        env.send(q, make_msg(MsgKind::TreeDown, kTagBits + 5, m->a, 9));
                }
            }
        }
    });
    return count_at_root;
}

} // namespace

std::uint64_t discover_mwoes(Sim& sim) {
    auto& st = sim.st;
    probe_round(sim);

    // one convergecast cycle: lexicographic minimum (rank, parent fragment)
    ConvCycle conv;
    conv.name = "mwoe_conv";
    conv.agg = Agg::MinPair;
    conv.input = [&](VertexId v) {
        const SolVertex& s = sim.st[v];
        if (!frag_active(s) || !s.local_cand.valid()) return CycleValue{};
        return CycleValue{s.local_cand.rank, s.local_cand.neighbor_frag, true};
    };
    conv.deliver = [&](VertexId leader, const CycleValue& val, const RoutingLabel*) {
        sim.st[leader].best_cand = Cand{val.x, kNoPort, val.y};
    };
    run_convergecast_cycle(sim, conv);

    // one broadcast cycle: the MWOE and parent id, or termination (rank 0)
    BcastCycle bc;
    bc.name = "mwoe_bcast";
    bc.query = [&](VertexId v) { return frag_active(sim.st[v]); };
    bc.publish = [&](VertexId leader) -> CycleValue {
        const SolVertex& s = sim.st[leader];
        if (!frag_active(s)) return CycleValue{};
        if (s.best_cand.valid()) return CycleValue{s.best_cand.rank, s.best_cand.neighbor_frag, true};
        return CycleValue{0, 0, true};
    };
    bc.on_receive = [&](VertexId v, const CycleValue& val, const RoutingLabel*) {
        SolVertex& s = sim.st[v];
        if (val.x == 0) {
            s.terminated = true;
            return;
        }
        s.vparent = val.y;
        if (s.local_cand.valid() && s.local_cand.rank == val.x) {
            s.is_vadj = true;
            s.mwoe_port = s.local_cand.port;
            s.mwoe_rank = val.x;
            bool fresh = std::find(s.mst_ports.begin(), s.mst_ports.end(), s.local_cand.port) ==
                         s.mst_ports.end();
            if (fresh) s.mst_ports.push_back(s.local_cand.port); // the edge joins the MSF
        }
    };
    run_broadcast_cycle(sim, bc);

    // merge announcements over the MWOEs; the doubly-discovered edge picks
    // the virtual root by larger fragment id
    PhaseConfig pa;
    pa.name = "ph2_announce";
    pa.frames_per_macro = words_for(sim, w_ids(sim, 1, 6) + sim.glob.rank_bits);
    pa.fixed_macro_rounds = 2;
    sim.run(pa, [&](Env& env) {
        SolVertex& s = st[env.id()];
        if (env.round() == 1) {
            if (s.is_vadj && frag_active(s))
                env.send(s.mwoe_port,
                         make_msg(MsgKind::MwoeAnnounce, w_ids(sim, 1, 6) + sim.glob.rank_bits,
                                  s.frag_id, s.mwoe_rank, sim.phase2_index));
            return;
        }
        if (!s.is_vadj) return;
        const Msg* back = env.arrived(s.mwoe_port);
        if (back && back->kind == MsgKind::MwoeAnnounce && back->b == s.mwoe_rank &&
            s.frag_id > back->a) {
            s.vx_x = 1; // mutual edge, we win the root
            s.vx_valid = true;
        }
        account(sim, env.id());
    });

    ConvCycle rootc;
    rootc.name = "root_conv";
    rootc.agg = Agg::Or1;
    rootc.input = [&](VertexId v) {
        SolVertex& s = sim.st[v];
        if (!s.vx_valid) return CycleValue{};
        CycleValue out{s.vx_x, 0, true};
        s.vx_x = 0;
        s.vx_valid = false;
        return out;
    };
    rootc.deliver = [&](VertexId leader, const CycleValue& val, const RoutingLabel*) {
        sim.st[leader].vx_x = val.x;
        sim.st[leader].vx_valid = true;
    };
    run_convergecast_cycle(sim, rootc);

    BcastCycle rootb;
    rootb.name = "root_bcast";
    rootb.query = [&](VertexId v) { return frag_active(sim.st[v]); };
    rootb.publish = [&](VertexId leader) -> CycleValue {
        const SolVertex& s = sim.st[leader];
        if (!frag_active(s)) return CycleValue{};
        return CycleValue{(s.vx_valid && s.vx_x) ? 1u : 0u, 0, true};
    };
    rootb.on_receive = [&](VertexId v, const CycleValue& val, const RoutingLabel*) {
        SolVertex& s = sim.st[v];
        s.is_virtual_root = val.x != 0;
        if (s.is_virtual_root) s.vparent = kNoValue;
    };
    run_broadcast_cycle(sim, rootb);
    for (VertexId v = 0; v < sim.glob.n; ++v) {
        SolVertex& s = sim.st[v];
        if (s.vx_valid) {
            s.vx_x = 0;
            s.vx_valid = false;
            account(sim, v);
        }
    }

    return status_count(sim);
}

void vx_to_all_children(Sim& sim, const char* name,
                        const std::function<std::pair<std::uint64_t, std::uint64_t>(VertexId)>& payload,
                        const std::function<void(VertexId, std::uint64_t, std::uint64_t)>& deliver) {
    auto& st = sim.st;
    PhaseConfig pc;
    pc.name = std::string(name) + ".ping";
    pc.frames_per_macro = words_for(sim, w_vals(sim, 2, 6));
    pc.fixed_macro_rounds = 3;
    sim.run(pc, [&](Env& env) {
        SolVertex& s = st[env.id()];
        if (env.round() == 1) {
            if (s.is_vadj && frag_active(s) && s.vparent != kNoValue)
                env.send(s.mwoe_port,
                         make_msg(MsgKind::VPing, w_ids(sim, 1, 9), s.frag_id, kChildPing,
                                  sim.phase2_index));
            return;
        }
        if (env.round() == 2) {
            for (PortId p : env.arrivals()) {
                const Msg* m = env.arrived(p);
                if (!m || m->kind != MsgKind::VPing || m->b != kChildPing) continue;
                if (!frag_active(s)) continue;
                auto [x, y] = payload(env.id());
                env.send(p, make_msg(MsgKind::VReply, w_vals(sim, 2, 6), x, y, sim.phase2_index));
            }
            return;
        }
        for (PortId p : env.arrivals()) {
            const Msg* m = env.arrived(p);
            if (!m || m->kind != MsgKind::VReply) continue;
            s.vx_x = m->a;
            s.vx_y = m->b;
            s.vx_valid = true;
            account(sim, env.id());
        }
    });

    ConvCycle conv;
    conv.name = name;
    conv.agg = Agg::First;
    conv.input = [&](VertexId v) {
        SolVertex& s = st[v];
        if (!s.vx_valid) return CycleValue{};
        CycleValue out{s.vx_x, s.vx_y, true};
        s.vx_x = s.vx_y = 0;
        s.vx_valid = false;
        return out;
    };
    conv.deliver = [&](VertexId leader, const CycleValue& val, const RoutingLabel*) {
        SolVertex& s = st[leader];
        s.vx_x = val.x;
        s.vx_y = val.y;
        s.vx_valid = true;
    };
    run_convergecast_cycle(sim, conv);

    BcastCycle bc;
    bc.name = name;
    bc.query = [&](VertexId v) { return frag_active(st[v]); };
    bc.publish = [&](VertexId leader) -> CycleValue {
        const SolVertex& s = st[leader];
        if (!s.vx_valid) return CycleValue{};
        return CycleValue{s.vx_x, s.vx_y, true};
    };
    bc.on_receive = [&](VertexId v, const CycleValue& val, const RoutingLabel*) {
        deliver(v, val.x, val.y);
    };
    run_broadcast_cycle(sim, bc);
    for (VertexId v = 0; v < sim.glob.n; ++v) {
        SolVertex& s = st[v];
        if (s.vx_valid) {
            s.vx_x = s.vx_y = 0;
            s.vx_valid = false;
            account(sim, v);
        }
    }
}

void vx_to_parent(Sim& sim, const char* name, Agg agg,
                  const std::function<bool(VertexId)>& child_sends,
                  const std::function<std::pair<std::uint64_t, std::uint64_t>(VertexId)>& value,
                  const std::function<void(VertexId, const CycleValue&)>& deliver_leader,
                  bool publish, const std::function<void(VertexId, std::uint64_t, std::uint64_t)>& on_receive) {
    auto& st = sim.st;
    PhaseConfig pc;
    pc.name = std::string(name) + ".up";
    pc.frames_per_macro = words_for(sim, w_vals(sim, 2, 0) + sim.glob.id_bits + 3);
    pc.fixed_macro_rounds = 2;
    sim.run(pc, [&](Env& env) {
        SolVertex& s = st[env.id()];
        if (env.round() == 1) {
            if (s.is_vadj && frag_active(s) && s.vparent != kNoValue && child_sends(env.id())) {
                auto [x, y] = value(env.id());
                env.send(s.mwoe_port,
                         make_msg(MsgKind::VPing, w_vals(sim, 2, 3) + sim.glob.id_bits, s.frag_id,
                                  kPropose, x, y));
            }
            return;
        }
        for (PortId p : env.arrivals()) {
            const Msg* m = env.arrived(p);
            if (!m || m->kind != MsgKind::VPing || m->b != kPropose) continue;
            CycleValue acc = s.vx_valid ? CycleValue{s.vx_x, s.vx_y, true} : CycleValue{};
            fold_value(agg, acc, CycleValue{m->c, m->d, true});
            s.vx_x = acc.x;
            s.vx_y = acc.y;
            s.vx_valid = true;
        }
        account(sim, env.id());
    });

    ConvCycle conv;
    conv.name = name;
    conv.agg = agg;
    conv.input = [&](VertexId v) {
        SolVertex& s = st[v];
        if (!s.vx_valid) return CycleValue{};
        CycleValue out{s.vx_x, s.vx_y, true};
        s.vx_x = s.vx_y = 0;
        s.vx_valid = false;
        return out;
    };
    conv.deliver = [&](VertexId leader, const CycleValue& val, const RoutingLabel*) {
        deliver_leader(leader, val);
        SolVertex& s = st[leader];
        s.vx_x = val.x;
        s.vx_y = val.y;
        s.vx_valid = true;
    };
    run_convergecast_cycle(sim, conv);

    if (publish) {
        BcastCycle bc;
        bc.name = name;
        bc.query = [&](VertexId v) { return frag_active(st[v]); };
        bc.publish = [&](VertexId leader) -> CycleValue {
            const SolVertex& s = st[leader];
            if (!s.vx_valid) return CycleValue{};
            return CycleValue{s.vx_x, s.vx_y, true};
        };
        bc.on_receive = [&](VertexId v, const CycleValue& val, const RoutingLabel*) {
            if (on_receive) on_receive(v, val.x, val.y);
        };
        run_broadcast_cycle(sim, bc);
    }
    for (VertexId v = 0; v < sim.glob.n; ++v) {
        SolVertex& s = st[v];
        if (s.vx_valid) {
            s.vx_x = s.vx_y = 0;
            s.vx_valid = false;
            account(sim, v);
        }
    }
}

namespace {

std::uint32_t cv_iterations(std::uint64_t max_color) {
    std::uint32_t iters = 0;
    std::uint64_t c = max_color;
    while (c > 5) {
        std::uint32_t bits = bit_width_for(c);
        c = 2ull * (bits - 1) + 1;
        ++iters;
    }
    return iters;
}

std::uint64_t root_pick(std::uint64_t avoid) {
    for (std::uint64_t c = 0;; ++c)
        if (c != avoid) return c;
}

} // namespace

void three_coloring(Sim& sim) {
    auto& st = sim.st;
    for (VertexId v = 0; v < sim.glob.n; ++v) {
        st[v].color = st[v].frag_id;
        st[v].parent_color = 0;
        account(sim, v);
    }
    std::uint32_t iters = cv_iterations(sim.glob.n);
    for (std::uint32_t it = 0; it < iters; ++it) {
        vx_to_all_children(
            sim, "cv_color", [&](VertexId v) { return std::pair{st[v].color, std::uint64_t{0}}; },
            [&](VertexId v, std::uint64_t x, std::uint64_t) { st[v].parent_color = x; });
        for (VertexId v = 0; v < sim.glob.n; ++v) {
            SolVertex& s = st[v];
            if (!frag_active(s)) continue;
            if (s.is_virtual_root) {
                s.color = s.color & 1;
            } else {
                std::uint64_t diff = s.color ^ s.parent_color;
                if (diff == 0) throw ProtocolFault("adjacent equal colors during reduction");
                std::uint32_t k = 0;
                while (((diff >> k) & 1) == 0) ++k;
                s.color = 2ull * k + ((s.color >> k) & 1);
            }
            account(sim, v);
        }
    }
    // shift-down and recolor, removing colors 5, 4, 3
    for (std::uint64_t c = 5; c >= 3; --c) {
        vx_to_all_children(
            sim, "cv_shift",
            [&](VertexId v) {
                const SolVertex& s = st[v];
                std::uint64_t next = s.is_virtual_root ? root_pick(s.color) : s.parent_color;
                return std::pair{s.color, next};
            },
            [&](VertexId v, std::uint64_t x, std::uint64_t y) {
                SolVertex& s = st[v];
                s.pre_shift_color = s.color;
                s.color = x;
                s.parent_color = y;
            });
        for (VertexId v = 0; v < sim.glob.n; ++v) {
            SolVertex& s = st[v];
            if (!frag_active(s)) continue;
            if (s.is_virtual_root) {
                s.pre_shift_color = s.color;
                s.color = root_pick(s.color);
            }
            if (s.color == c) {
                for (std::uint64_t pick = 0; pick < 3; ++pick) {
                    if (pick == s.pre_shift_color) continue;
                    if (!s.is_virtual_root && pick == s.parent_color) continue;
                    s.color = pick;
                    break;
                }
            }
            account(sim, v);
        }
    }
    // final colors to children, so matching gates see fresh parent colors
    vx_to_all_children(
        sim, "cv_final", [&](VertexId v) { return std::pair{st[v].color, std::uint64_t{0}}; },
        [&](VertexId v, std::uint64_t x, std::uint64_t) { st[v].parent_color = x; });
}

// maximal matching: for each color class, unmatched parents of that color
// elect the smallest proposing child
void run_matching(Sim& sim) {
    auto& st = sim.st;
    for (std::uint64_t c = 0; c < 3; ++c) {
        PhaseConfig pc;
        pc.name = "match_propose";
        pc.frames_per_macro = words_for(sim, w_ids(sim, 1, 9));
        pc.fixed_macro_rounds = 2;
        sim.run(pc, [&](Env& env) {
            SolVertex& s = st[env.id()];
            if (env.round() == 1) {
                if (s.is_vadj && frag_active(s) && s.vparent != kNoValue && !s.matched &&
                    s.parent_color == c)
                    env.send(s.mwoe_port, make_msg(MsgKind::VPing, w_ids(sim, 1, 9), s.frag_id,
                                                   kPropose, sim.phase2_index));
                return;
            }
            if (!frag_active(s)) return;
            for (PortId p : env.arrivals()) {
                const Msg* m = env.arrived(p);
                if (!m || m->kind != MsgKind::VPing || m->b != kPropose) continue;
                if (!s.vx_valid || m->a < s.vx_x) {
                    s.vx_x = m->a;
                    s.vx_valid = true;
                }
            }
            account(sim, env.id());
        });

        ConvCycle conv;
        conv.name = "match_elect";
        conv.agg = Agg::MinPair;
        conv.input = [&](VertexId v) {
            SolVertex& s = st[v];
            if (!s.vx_valid) return CycleValue{};
            CycleValue out{s.vx_x, 0, true};
            s.vx_x = 0;
            s.vx_valid = false;
            return out;
        };
        conv.deliver = [&](VertexId leader, const CycleValue& val, const RoutingLabel*) {
            SolVertex& s = st[leader];
            s.vx_x = val.x;
            s.vx_valid = true;
        };
        run_convergecast_cycle(sim, conv);

        // the parent announces its elected child (or stays silent)
        std::vector<bool> due(sim.glob.n, false);
        for (VertexId v = 0; v < sim.glob.n; ++v) {
            SolVertex& s = st[v];
            if (s.is_leader && frag_active(s) && s.color == c && !s.matched && s.vx_valid) due[v] = true;
        }
        BcastCycle bc;
        bc.name = "match_announce";
        bc.query = [&](VertexId v) { return frag_active(st[v]); };
        bc.publish = [&](VertexId leader) -> CycleValue {
            if (!due[leader]) return CycleValue{};
            return CycleValue{st[leader].vx_x, 0, true};
        };
        bc.on_receive = [&](VertexId v, const CycleValue& val, const RoutingLabel*) {
            SolVertex& s = st[v];
            s.matched = true;
            s.partner = val.x;
        };
        run_broadcast_cycle(sim, bc);
        for (VertexId v = 0; v < sim.glob.n; ++v) {
            SolVertex& s = st[v];
            if (s.vx_valid) {
                s.vx_x = 0;
                s.vx_valid = false;
            }
        }

        // accept response over the elected child's MWOE, then replicate
        // there; proposers ping afresh so no stale buffers are trusted
        PhaseConfig pr;
        pr.name = "match_accept";
        pr.frames_per_macro = words_for(sim, w_ids(sim, 1, 9));
        pr.fixed_macro_rounds = 3;
        sim.run(pr, [&](Env& env) {
            SolVertex& s = st[env.id()];
            if (env.round() == 1) {
                if (s.is_vadj && frag_active(s) && s.vparent != kNoValue && !s.matched &&
                    s.parent_color == c)
                    env.send(s.mwoe_port, make_msg(MsgKind::VPing, w_ids(sim, 1, 9), s.frag_id,
                                                   kPropose, sim.phase2_index));
                return;
            }
            if (env.round() == 2) {
                if (!frag_active(s) || !s.matched || s.partner == kNoValue) return;
                for (PortId p : env.arrivals()) {
                    const Msg* m = env.arrived(p);
                    if (m && m->kind == MsgKind::VPing && m->b == kPropose && m->a == s.partner)
                        env.send(p, make_msg(MsgKind::VReply, w_ids(sim, 1, 3), s.frag_id, kPropose));
                }
                return;
            }
            for (PortId p : env.arrivals()) {
                const Msg* m = env.arrived(p);
                if (!m || m->kind != MsgKind::VReply || m->b != kPropose) continue;
                if (!s.is_vadj || p != s.mwoe_port || m->a != s.vparent) continue;
                s.vx_x = m->a;
                s.vx_valid = true;
                account(sim, env.id());
            }
        });

        ConvCycle ac;
        ac.name = "match_accepted";
        ac.agg = Agg::First;
        ac.input = [&](VertexId v) {
            SolVertex& s = st[v];
            if (!s.vx_valid) return CycleValue{};
            CycleValue out{s.vx_x, 0, true};
            s.vx_x = 0;
            s.vx_valid = false;
            return out;
        };
        ac.deliver = [&](VertexId leader, const CycleValue& val, const RoutingLabel*) {
            SolVertex& s = st[leader];
            s.vx_x = val.x;
            s.vx_valid = true;
        };
        run_convergecast_cycle(sim, ac);

        std::vector<bool> due2(sim.glob.n, false);
        for (VertexId v = 0; v < sim.glob.n; ++v) {
            SolVertex& s = st[v];
            if (s.is_leader && frag_active(s) && !s.matched && s.vx_valid) due2[v] = true;
        }
        BcastCycle b2;
        b2.name = "match_confirm";
        b2.query = [&](VertexId v) { return frag_active(st[v]); };
        b2.publish = [&](VertexId leader) -> CycleValue {
            if (!due2[leader]) return CycleValue{};
            return CycleValue{st[leader].vx_x, 0, true};
        };
        b2.on_receive = [&](VertexId v, const CycleValue& val, const RoutingLabel*) {
            SolVertex& s = st[v];
            s.matched = true;
            s.partner = val.x;
        };
        run_broadcast_cycle(sim, b2);
        for (VertexId v = 0; v < sim.glob.n; ++v) {
            SolVertex& s = st[v];
            if (s.vx_valid) {
                s.vx_x = 0;
                s.vx_valid = false;
            }
            account(sim, v);
        }
    }
}

namespace {

// attachment of unmatched fragments and subtree orientation
void attach_and_orient(Sim& sim) {
    auto& st = sim.st;
    vx_to_all_children(
        sim, "post_status",
        [&](VertexId v) {
            const SolVertex& s = st[v];
            std::uint64_t matched = s.matched ? 1 : 0;
            std::uint64_t winner = (s.matched && s.frag_id > s.partner) ? 1 : 0;
            return std::pair{matched, winner};
        },
        [&](VertexId v, std::uint64_t x, std::uint64_t y) {
            SolVertex& s = st[v];
            s.parent_matched = x != 0;
            s.parent_winner = y != 0;
        });
    vx_to_parent(
        sim, "post_child", Agg::MinPair, [&](VertexId v) { return st[v].matched; },
        [&](VertexId v) {
            const SolVertex& s = st[v];
            return std::pair{s.frag_id, static_cast<std::uint64_t>(
                                            (s.matched && s.frag_id > s.partner) ? 1 : 0)};
        },
        [&](VertexId, const CycleValue&) {}, true,
        [&](VertexId v, std::uint64_t x, std::uint64_t y) {
            SolVertex& s = st[v];
            s.matched_child = x;
            s.matched_child_winner = y != 0;
        });

    for (VertexId v = 0; v < sim.glob.n; ++v) {
        SolVertex& s = st[v];
        if (s.small_component) continue;
        if (s.terminated) {
            s.is_subtree_root = true;
            s.subtree_parent = kNoValue;
            s.subtree_depth_of_frag = 0;
            account(sim, v);
            continue;
        }
        if (s.matched) {
            s.is_subtree_root = s.frag_id > s.partner;
            s.subtree_parent = s.is_subtree_root ? kNoValue : s.partner;
            s.subtree_depth_of_frag = s.is_subtree_root ? 0 : 1;
        } else {
            std::uint64_t target;
            std::uint32_t target_depth;
            if (s.vparent != kNoValue && s.parent_matched) {
                target = s.vparent;
                target_depth = s.parent_winner ? 0 : 1;
            } else if (s.matched_child != kNoValue) {
                target = s.matched_child;
                target_depth = s.matched_child_winner ? 0 : 1;
            } else {
                throw ProtocolFault("unmatched fragment without a matched neighbor");
            }
            s.is_subtree_root = false;
            s.subtree_parent = target;
            s.subtree_depth_of_frag = target_depth + 1;
        }
        if (s.subtree_depth_of_frag > 3) throw ProtocolFault("virtual subtree deeper than 3");
        // when the subtree edge is the fragment's own MWOE, its adjacent
        // vertex already knows the port
        if (s.subtree_parent != kNoValue && s.subtree_parent == s.vparent && s.is_vadj)
            s.subtree_parent_port = s.mwoe_port;
        account(sim, v);
    }

    // reversed subtree edges (the parent hangs below its own virtual child):
    // a fresh round of MWOE marks lets the boundary vertex learn its port
    PhaseConfig pm;
    pm.name = "subtree_mark";
    pm.fixed_macro_rounds = 2;
    pm.frames_per_macro = words_for(sim, w_ids(sim, 1, 9));
    sim.run(pm, [&](Env& env) {
        SolVertex& s = st[env.id()];
        if (env.round() == 1) {
            if (s.is_vadj && frag_active(s) && s.vparent != kNoValue)
                env.send(s.mwoe_port, make_msg(MsgKind::VPing, w_ids(sim, 1, 9), s.frag_id,
                                               kSubtreeMark, sim.phase2_index));
            return;
        }
        if (s.small_component || s.terminated || s.subtree_parent == kNoValue) return;
        for (PortId p : env.arrivals()) {
            const Msg* m = env.arrived(p);
            if (!m || m->kind != MsgKind::VPing || m->b != kSubtreeMark) continue;
            if (m->a == s.subtree_parent) {
                s.subtree_parent_port = p;
                account(sim, env.id());
            }
        }
    });
}

} // namespace

void run_gkp_phase(Sim& sim) {
    three_coloring(sim);
    run_matching(sim);
    attach_and_orient(sim);
    if (sim.checkpoint) sim.checkpoint(sim, "attach", sim.phase2_index);
    generate_slot_set(sim);
    broadcast_slot_bound(sim);
    if (sim.checkpoint) sim.checkpoint(sim, "slots", sim.phase2_index);
}

void run_second_part(Sim& sim) {
    sim.stage = Stage::Phase2;
    if (sim.glob.k_b == 0) return; // everything ended as small components
    std::uint32_t cap = 2 * std::max<std::uint32_t>(ceil_log2(std::max(sim.glob.n, 2u)), 1) + 2;
    for (std::uint32_t phase = 1;; ++phase) {
        if (phase > cap) throw ProtocolFault("phase-2 cap exceeded (merge stalled)");
        sim.phase2_index = phase;
        clear_virt_state(sim);
        std::uint64_t cycles_before = sim.metrics.cycles_total;
        std::uint64_t active = discover_mwoes(sim);
        if (sim.checkpoint) sim.checkpoint(sim, "discover", phase);
        if (active == 0) {
            sim.metrics.phase2_count = phase - 1;
            break;
        }
        run_gkp_phase(sim);
        std::uint64_t used = sim.metrics.cycles_total - cycles_before;
        sim.metrics.max_cycles_per_phase =
            std::max<std::uint32_t>(sim.metrics.max_cycles_per_phase, static_cast<std::uint32_t>(used));
    }
}

} // namespace congest
