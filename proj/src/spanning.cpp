#include "congest/spanning.hpp"

#include <algorithm>

namespace congest {

namespace {
// message width helpers
std::uint32_t w_ids(const Sim& sim, std::uint32_t ids, std::uint32_t extra = 0) {
    return kTagBits + ids * sim.glob.id_bits + extra;
}
constexpr std::uint64_t kPinBfsTree = 1;
constexpr std::uint64_t kPinBaseTree = 2;
} // namespace

void build_bfs_tree(Sim& sim) {
    auto& st = sim.st;
    VertexId root = sim.glob.root;

    PhaseConfig pc;
    pc.name = "bfs";
    auto handler = [&](Env& env) {
        SolVertex& s = st[env.id()];
        std::uint64_t r = env.round();
        // join wave
        if (!s.joined) {
            PortId best = kNoPort;
            std::uint32_t pdepth = 0;
            for (PortId p : env.arrivals()) {
                const Msg* m = env.arrived(p);
                if (m && m->kind == MsgKind::BfsJoin && (best == kNoPort || p < best)) {
                    best = p;
                    pdepth = static_cast<std::uint32_t>(m->a);
                }
            }
            bool is_root = env.id() == root && r == 1;
            if (is_root || best != kNoPort) {
                s.joined = true;
                s.depth = is_root ? 0 : pdepth + 1;
                s.parent_port = is_root ? kNoPort : best;
                s.join_round = r;
                for (PortId p = 0; p < env.degree(); ++p) {
                    if (p == s.parent_port) {
                        env.send(p, make_msg(MsgKind::BfsAck, w_ids(sim, 1)));
                    } else {
                        env.send(p, make_msg(MsgKind::BfsJoin, w_ids(sim, 1), s.depth));
                    }
                }
                env.wake_at(r + 2); // ACKs land exactly two rounds after the join
                account(sim, env.id());
                return;
            }
        }
        if (!s.joined) return;
        // census at join_round + 2
        if (r == s.join_round + 2 && !s.depth_done) {
            std::uint32_t acks = 0;
            for (PortId p : env.arrivals()) {
                const Msg* m = env.arrived(p);
                if (m && m->kind == MsgKind::BfsAck) ++acks;
            }
            s.child_count = acks;
            if (acks == 0) {
                if (s.parent_port == kNoPort) { // n == 1 or star root with no children
                    s.tree_depth = s.depth;
                    s.depth_done = true;
                } else {
                    env.send(s.parent_port, make_msg(MsgKind::DepthUp, w_ids(sim, 1), s.depth));
                }
            }
            account(sim, env.id());
        }
        // depth convergecast and dissemination
        for (PortId p : env.arrivals()) {
            const Msg* m = env.arrived(p);
            if (!m) continue;
            if (m->kind == MsgKind::DepthUp) {
                s.max_depth_seen = std::max(s.max_depth_seen, static_cast<std::uint32_t>(m->a));
                ++s.depth_reports;
                if (s.depth_reports == s.child_count) {
                    std::uint32_t below = std::max(s.max_depth_seen, s.depth);
                    if (s.parent_port == kNoPort) {
                        s.tree_depth = below;
                        s.depth_done = true;
                        for (PortId q = 0; q < env.degree(); ++q) {
                            const Msg* pin = env.buffered(q);
                            if (pin && pin->kind == MsgKind::DepthUp)
                                env.send(q, make_msg(MsgKind::DepthDown, w_ids(sim, 1), s.tree_depth));
                        }
                    } else {
                        env.send(s.parent_port, make_msg(MsgKind::DepthUp, w_ids(sim, 1), below));
                    }
                }
            } else if (m->kind == MsgKind::DepthDown) {
                s.tree_depth = static_cast<std::uint32_t>(m->a);
                s.depth_done = true;
                for (PortId q = 0; q < env.degree(); ++q) {
                    const Msg* pin = env.buffered(q);
                    if (pin && pin->kind == MsgKind::DepthUp)
                        env.send(q, make_msg(MsgKind::DepthDown, w_ids(sim, 1), s.tree_depth));
                }
            }
        }
        account(sim, env.id());
    };
    sim.run(pc, handler);

    for (VertexId v = 0; v < sim.glob.n; ++v)
        if (!st[v].joined || !st[v].depth_done)
            throw ProtocolFault("BFS did not reach vertex " + std::to_string(v) + " (disconnected input?)");
    sim.glob.d_t = st[root].tree_depth;
    for (VertexId v = 0; v < sim.glob.n; ++v) {
        st[v].depth_reports = 0;
        st[v].max_depth_seen = 0;
        account(sim, v);
    }
}

void setup_routing(Sim& sim) {
    auto& st = sim.st;
    LabelCodec codec = sim.codec();

    // stage 1: subtree sizes up
    PhaseConfig ps;
    ps.name = "rt_size";
    sim.run(ps, [&](Env& env) {
        SolVertex& s = st[env.id()];
        if (env.round() == 1 && s.child_count == 0) {
            s.subtree_size = 1;
            if (s.parent_port != kNoPort)
                env.send(s.parent_port, make_msg(MsgKind::SizeUp, w_ids(sim, 1), 1));
            account(sim, env.id());
            return;
        }
        for (PortId p : env.arrivals()) {
            const Msg* m = env.arrived(p);
            if (!m || m->kind != MsgKind::SizeUp) continue;
            s.size_accum += m->a;
            ++s.size_reports;
            if (s.size_reports == s.child_count) {
                s.subtree_size = static_cast<std::uint32_t>(s.size_accum) + 1;
                if (s.parent_port != kNoPort)
                    env.send(s.parent_port, make_msg(MsgKind::SizeUp, w_ids(sim, 1), s.subtree_size));
            }
        }
        account(sim, env.id());
    });
    if (st[sim.glob.root].subtree_size != sim.glob.n)
        throw ProtocolFault("subtree size convergecast failed");

    // stage 2: DFS intervals and labels down; parent streams the pinned child
    // sizes in port order, so no per-child registers are needed
    std::uint32_t label_words = ceil_div(codec.label_bits_cap(sim.glob.n), sim.engine.word_bits());
    PhaseConfig pa;
    pa.name = "rt_assign";
    pa.frames_per_macro = static_cast<std::uint32_t>(ceil_div(kTagBits + 2ull * sim.glob.id_bits, sim.engine.word_bits()) + label_words);

    auto forward_children = [&](Env& env, SolVertex& s) {
        std::uint32_t cursor = s.table.dfs_number + 1;
        for (PortId p = 0; p < env.degree(); ++p) {
            const Msg* pin = env.buffered(p);
            if (!pin || pin->kind != MsgKind::SizeUp) continue;
            std::uint32_t csz = static_cast<std::uint32_t>(pin->a);
            bool light = 2ull * csz < s.subtree_size;
            if (!light) s.table.heavy_child_port = p;
            RoutingLabel child_label = s.self_label;
            if (light) child_label.light_edges.push_back(LabelEntry{s.depth, p});
            child_label.dfs_number = cursor;
            Msg m = make_msg(MsgKind::RtAssign, kTagBits + 2 * sim.glob.id_bits, cursor, cursor + csz);
            codec.encode(child_label, m);
            env.send(p, m);
            cursor += csz;
        }
    };

    sim.run(pa, [&](Env& env) {
        SolVertex& s = st[env.id()];
        if (env.round() == 1 && env.id() == sim.glob.root) {
            s.table.dfs_number = 1;
            s.table.interval_lo = 1;
            s.table.interval_hi = sim.glob.n + 1;
            s.table.parent_port = kNoPort;
            s.table.depth = 0;
            s.self_label.dfs_number = 1;
            s.routed = true;
            forward_children(env, s);
            account(sim, env.id());
            return;
        }
        for (PortId p : env.arrivals()) {
            const Msg* m = env.arrived(p);
            if (!m || m->kind != MsgKind::RtAssign) continue;
            s.self_label = codec.decode(*m);
            s.self_label.dfs_number = static_cast<std::uint32_t>(m->a);
            s.table.dfs_number = static_cast<std::uint32_t>(m->a);
            s.table.interval_lo = static_cast<std::uint32_t>(m->a);
            s.table.interval_hi = static_cast<std::uint32_t>(m->b);
            s.table.parent_port = s.parent_port;
            s.table.depth = s.depth;
            s.routed = true;
            forward_children(env, s);
        }
        account(sim, env.id());
    });

    for (VertexId v = 0; v < sim.glob.n; ++v) {
        if (!st[v].routed) throw ProtocolFault("routing setup missed a vertex");
        if (codec.label_bits(st[v].self_label) > codec.label_bits_cap(sim.glob.n))
            throw ProtocolFault("routing label exceeds its width cap");
        st[v].subtree_size = 0; // interval [lo,hi) carries this from here on
        st[v].size_accum = 0;
        st[v].size_reports = 0;
        account(sim, v);
    }
}

void assign_initial_slots(Sim& sim) {
    auto& st = sim.st;
    auto requester = [&](VertexId v) { return st[v].base_root && !st[v].small_component; };

    PhaseConfig up;
    up.name = "slot_requests_up";
    sim.run(up, [&](Env& env) {
        SolVertex& s = st[env.id()];
        if (env.round() == 1 && s.child_count == 0) {
            std::uint64_t req = requester(env.id()) ? 1 : 0;
            s.size_accum = req;
            if (s.parent_port != kNoPort)
                env.send(s.parent_port, make_msg(MsgKind::AllocUp, w_ids(sim, 1), req));
            return;
        }
        for (PortId p : env.arrivals()) {
            const Msg* m = env.arrived(p);
            if (!m || m->kind != MsgKind::AllocUp) continue;
            s.size_accum += m->a;
            ++s.size_reports;
            if (s.size_reports == s.child_count) {
                s.size_accum += requester(env.id()) ? 1 : 0;
                if (s.parent_port != kNoPort)
                    env.send(s.parent_port, make_msg(MsgKind::AllocUp, w_ids(sim, 1), s.size_accum));
            }
        }
    });

    std::uint64_t total = st[sim.glob.root].size_accum;
    sim.glob.k_b = static_cast<std::uint32_t>(total);
    sim.glob.max_slot = static_cast<std::uint32_t>(total);

    PhaseConfig down;
    down.name = "slot_ranges_down";
    auto distribute = [&](Env& env, SolVertex& s, std::uint64_t lo) {
        if (requester(env.id())) {
            s.p_slot = static_cast<std::uint32_t>(lo++);
            s.is_leader = true;
            s.subset_count = 1;
        }
        for (PortId p = 0; p < env.degree(); ++p) {
            const Msg* pin = env.buffered(p);
            if (!pin || pin->kind != MsgKind::AllocUp || pin->a == 0) continue;
            env.send(p, make_msg(MsgKind::AllocDown, w_ids(sim, 2), lo, lo + pin->a));
            lo += pin->a;
        }
        s.size_accum = 0;
        s.size_reports = 0;
        account(sim, env.id());
    };
    sim.run(down, [&](Env& env) {
        SolVertex& s = st[env.id()];
        if (env.round() == 1 && env.id() == sim.glob.root) {
            distribute(env, s, 1);
            return;
        }
        for (PortId p : env.arrivals()) {
            const Msg* m = env.arrived(p);
            if (!m || m->kind != MsgKind::AllocDown) continue;
            distribute(env, s, m->a);
        }
    });
    for (VertexId v = 0; v < sim.glob.n; ++v) {
        sim.st[v].size_accum = 0;
        sim.st[v].size_reports = 0;
        account(sim, v);
    }
}

void broadcast_slot_bound(Sim& sim) {
    auto& st = sim.st;
    PhaseConfig pc;
    pc.name = "slot_bound_flood";
    sim.run(pc, [&](Env& env) {
        SolVertex& s = st[env.id()];
        if (env.round() == 1) {
            if (s.parent_port != kNoPort)
                env.send(s.parent_port, make_msg(MsgKind::TreePin, kTagBits + 2, kPinBfsTree));
            if (env.id() == sim.glob.root) {
                s.max_slot = sim.glob.max_slot;
                env.wake_at(2);
            }
            account(sim, env.id());
            return;
        }
        auto flood = [&](std::uint64_t smax, std::uint64_t kb) {
            for (PortId p = 0; p < env.degree(); ++p) {
                const Msg* pin = env.buffered(p);
                if (pin && pin->kind == MsgKind::TreePin && pin->a == kPinBfsTree)
                    env.send(p, make_msg(MsgKind::SMax, w_ids(sim, 2), smax, kb));
            }
        };
        if (env.round() == 2 && env.id() == sim.glob.root) {
            flood(sim.glob.max_slot, sim.glob.k_b);
            return;
        }
        for (PortId p : env.arrivals()) {
            const Msg* m = env.arrived(p);
            if (!m || m->kind != MsgKind::SMax) continue;
            s.max_slot = static_cast<std::uint32_t>(m->a);
            flood(m->a, m->b);
        }
        account(sim, env.id());
    });
}

void broadcast_leader_info(Sim& sim) {
    auto& st = sim.st;
    LabelCodec codec = sim.codec();
    std::uint32_t label_words = ceil_div(codec.label_bits_cap(sim.glob.n), sim.engine.word_bits());
    PhaseConfig pc;
    pc.name = "leader_info";
    pc.frames_per_macro = static_cast<std::uint32_t>(ceil_div(kTagBits + 1ull * sim.glob.id_bits, sim.engine.word_bits()) + label_words);
    sim.run(pc, [&](Env& env) {
        SolVertex& s = st[env.id()];
        if (s.small_component) return;
        auto compose = [&]() {
            Msg m = make_msg(MsgKind::TreeDown, kTagBits + sim.glob.id_bits, s.p_slot);
            codec.encode(s.leader_label, m);
            return m;
        };
        auto flood = [&]() {
            for (PortId p = 0; p < env.degree(); ++p) {
                const Msg* pin = env.buffered(p);
                if (pin && pin->kind == MsgKind::TreePin && pin->a == kPinBaseTree) env.send(p, compose());
            }
        };
        if (env.round() == 1) {
            if (s.base_parent_port != kNoPort)
                env.send(s.base_parent_port, make_msg(MsgKind::TreePin, kTagBits + 2, kPinBaseTree));
            if (s.base_root) env.wake_at(2);
            return;
        }
        if (env.round() == 2 && s.base_root) {
            s.leader_label = s.self_label;
            s.have_leader_label = true;
            flood();
            account(sim, env.id());
            return;
        }
        for (PortId p : env.arrivals()) {
            const Msg* m = env.arrived(p);
            if (!m || m->kind != MsgKind::TreeDown) continue;
            s.p_slot = static_cast<std::uint32_t>(m->a);
            s.leader_label = codec.decode(*m);
            s.have_leader_label = true;
            flood();
        }
        account(sim, env.id());
    });
}

namespace {
constexpr std::uint64_t kPinGeneric = 9;
constexpr std::uint64_t kTokenConv = 12;

PortId view_parent(const SolVertex& s, TreeView view) {
    return view == TreeView::Fragment ? s.frag_parent_port : s.base_parent_port;
}
std::uint32_t view_children(const SolVertex& s, TreeView view) {
    return view == TreeView::Fragment ? s.frag_child_count : s.base_child_count;
}
} // namespace

PhaseStats tree_broadcast(Sim& sim, TreeView view,
                          const std::function<std::optional<std::uint64_t>(VertexId)>& origin_payload,
                          const std::function<void(VertexId, std::uint64_t)>& on_receive) {
    auto& st = sim.st;
    std::uint32_t vb = std::max(sim.glob.rank_bits, sim.glob.id_bits);
    PhaseConfig pc;
    pc.name = "tree_bcast";
    pc.frames_per_macro = words_for(sim, kTagBits + vb + 4);
    sim.run(pc, [&](Env& env) {
        SolVertex& s = st[env.id()];
        auto flood = [&](std::uint64_t payload) {
            for (PortId p = 0; p < env.degree(); ++p) {
                const Msg* pin = env.buffered(p);
                if (pin && pin->kind == MsgKind::TreePin && pin->a == kPinGeneric)
                    env.send(p, make_msg(MsgKind::TreeDown, kTagBits + vb + 4, payload, kTokenConv));
            }
        };
        if (env.round() == 1) {
            PortId up = view_parent(s, view);
            if (up != kNoPort) env.send(up, make_msg(MsgKind::TreePin, kTagBits + 4, kPinGeneric));
            if (origin_payload(env.id())) env.wake_at(2);
            return;
        }
        if (env.round() == 2) {
            if (auto payload = origin_payload(env.id())) {
                on_receive(env.id(), *payload);
                flood(*payload);
                account(sim, env.id());
                return;
            }
        }
        for (PortId p : env.arrivals()) {
            const Msg* m = env.arrived(p);
            if (!m || m->kind != MsgKind::TreeDown || m->b != kTokenConv) continue;
            on_receive(env.id(), m->a);
            flood(m->a);
            account(sim, env.id());
        }
    });
    return sim.metrics.phases.back();
}

PhaseStats tree_convergecast(Sim& sim, TreeView view, Agg agg,
                             const std::function<CycleValue(VertexId)>& input,
                             const std::function<void(VertexId, const CycleValue&)>& deliver_root,
                             const UserCombine& user) {
    auto& st = sim.st;
    std::uint32_t vb = std::max(sim.glob.rank_bits, sim.glob.id_bits);
    PhaseConfig pc;
    pc.name = "tree_conv";
    pc.frames_per_macro = words_for(sim, kTagBits + 2 * vb + 5);
    sim.run(pc, [&](Env& env) {
        SolVertex& s = st[env.id()];
        auto finish = [&]() {
            CycleValue acc = s.own_valid ? CycleValue{s.own_x, s.own_y, true} : CycleValue{};
            if (fold_value(agg, acc, input(env.id()), &user)) s.retrace_port = kNoPort;
            PortId up = view_parent(s, view);
            if (up == kNoPort) {
                deliver_root(env.id(), acc);
            } else {
                env.send(up, make_msg(MsgKind::TreeUp, kTagBits + 2 * vb + 5, acc.has ? 1 : 0,
                                      acc.x, acc.y, kTokenConv));
            }
            s.own_valid = false;
            s.own_x = s.own_y = 0;
            account(sim, env.id());
        };
        if (env.round() == 1) {
            if (view_children(s, view) == 0) finish();
            return;
        }
        for (PortId p : env.arrivals()) {
            const Msg* m = env.arrived(p);
            if (!m || m->kind != MsgKind::TreeUp || m->d != kTokenConv) continue;
            CycleValue acc = s.own_valid ? CycleValue{s.own_x, s.own_y, true} : CycleValue{};
            if (fold_value(agg, acc, CycleValue{m->b, m->c, (m->a & 1) != 0}, &user)) s.retrace_port = p;
            s.own_x = acc.x;
            s.own_y = acc.y;
            s.own_valid = acc.has;
            ++s.cyc_recv;
            if (s.cyc_recv == view_children(s, view)) {
                s.cyc_recv = 0;
                finish();
            }
            account(sim, env.id());
        }
    });
    return sim.metrics.phases.back();
}

} // namespace congest
