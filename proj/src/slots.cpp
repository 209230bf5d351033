#include "congest/slots.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "congest/cycle.hpp"

namespace congest {

SlotReport validate_slot_set(const Sim& sim) {
    SlotReport rep;
    auto fail = [&](const std::string& why) {
        rep.ok = false;
        rep.violation = why;
        return rep;
    };
    struct FragInfo {
        std::uint32_t p_slot = 0;
        std::set<std::uint32_t> q_slots;
        std::uint32_t bases = 0;
        VertexId leader = kNoVertex;
    };
    std::map<std::uint64_t, FragInfo> frags;
    std::map<std::uint64_t, std::uint64_t> base_to_frag;
    for (VertexId v = 0; v < sim.glob.n; ++v) {
        const SolVertex& s = sim.st[v];
        if (s.small_component) continue;
        auto& fi = frags[s.frag_id];
        if (fi.p_slot == 0) fi.p_slot = s.p_slot;
        if (fi.p_slot != s.p_slot) return fail("p-slot disagreement in fragment " + std::to_string(s.frag_id));
        if (s.is_leader) {
            if (fi.leader != kNoVertex) return fail("two leaders in fragment " + std::to_string(s.frag_id));
            fi.leader = v;
        }
        if (s.base_root) {
            base_to_frag[s.base_id] = s.frag_id;
            ++fi.bases;
            if (s.q_slot) {
                if (!fi.q_slots.insert(s.q_slot).second)
                    return fail("duplicate q-slot in fragment " + std::to_string(s.frag_id));
            }
        }
    }
    std::set<std::uint32_t> all;
    for (auto& [id, fi] : frags) {
        if (fi.leader == kNoVertex) return fail("fragment " + std::to_string(id) + " has no leader");
        if (!sim.st[fi.leader].base_root) return fail("p-slot owner is not a base root");
        if (sim.st[fi.leader].q_slot != 0) return fail("leader's base fragment holds a q-slot");
        if (fi.q_slots.size() + 1 != fi.bases)
            return fail("fragment " + std::to_string(id) + " has " + std::to_string(fi.bases) +
                        " base fragments but " + std::to_string(fi.q_slots.size()) + " q-slots");
        // consecutive range starting at the p-slot
        std::uint32_t lo = fi.p_slot;
        if (lo == 0) return fail("fragment without a p-slot");
        std::uint32_t hi = lo;
        for (std::uint32_t q : fi.q_slots) hi = std::max(hi, q);
        if (hi - lo + 1 != fi.bases)
            return fail("range of fragment " + std::to_string(id) + " is not consecutive");
        for (std::uint32_t q : fi.q_slots)
            if (q <= lo) return fail("p-slot is not first in its range");
        for (std::uint32_t sslot = lo; sslot <= hi; ++sslot) {
            if (sslot != lo && !fi.q_slots.count(sslot))
                return fail("hole at slot " + std::to_string(sslot));
            if (!all.insert(sslot).second) return fail("overlap at " + std::to_string(sslot));
        }
        if (hi > 2 * sim.glob.k_b) return fail("slot beyond 2*K_b");
    }
    return rep;
}

namespace {

constexpr std::uint64_t kSubtreePing = 7;

std::uint32_t w_ids(const Sim& sim, std::uint32_t ids, std::uint32_t extra = 0) {
    return kTagBits + ids * sim.glob.id_bits + extra;
}

bool active_frag(const SolVertex& s) { return !s.small_component; }

// step 1: children ping their subtree parents, parents count them
void step1_child_count(Sim& sim) {
    auto& st = sim.st;
    PhaseConfig pc;
    pc.name = "sg1_ping";
    pc.frames_per_macro = words_for(sim, w_ids(sim, 1, 9));
    pc.fixed_macro_rounds = 2;
    sim.run(pc, [&](Env& env) {
        SolVertex& s = st[env.id()];
        if (!active_frag(s)) return;
        if (env.round() == 1) {
            if (s.subtree_parent_port != kNoPort && !s.terminated)
                env.send(s.subtree_parent_port,
                         make_msg(MsgKind::VPing, w_ids(sim, 1, 9), s.frag_id, kSubtreePing,
                                  sim.phase2_index));
            return;
        }
        for (PortId p : env.arrivals()) {
            const Msg* m = env.arrived(p);
            if (!m || m->kind != MsgKind::VPing || m->b != kSubtreePing) continue;
            s.vx_x += 1;
            s.vx_valid = true;
        }
        account(sim, env.id());
    });

    ConvCycle conv;
    conv.name = "sg1_count";
    conv.agg = Agg::Sum2;
    conv.input = [&](VertexId v) {
        SolVertex& s = sim.st[v];
        if (!s.vx_valid) return CycleValue{};
        CycleValue out{s.vx_x, 0, true};
        s.vx_x = 0;
        s.vx_valid = false;
        return out;
    };
    conv.deliver = [&](VertexId leader, const CycleValue& val, const RoutingLabel*) {
        sim.st[leader].virt_child_count = static_cast<std::uint32_t>(val.x);
    };
    run_convergecast_cycle(sim, conv);

    BcastCycle bc;
    bc.name = "sg1_info";
    bc.query = [&](VertexId v) { return !sim.st[v].terminated; };
    bc.publish = [&](VertexId leader) {
        const SolVertex& s = sim.st[leader];
        if (s.terminated) return CycleValue{};
        return CycleValue{s.virt_child_count, s.subset_count, true};
    };
    bc.on_receive = [&](VertexId v, const CycleValue& val, const RoutingLabel*) {
        SolVertex& s = sim.st[v];
        s.sg_ready = val.x == 0; // leaf fragments are ready in the first iteration
        s.sg_total = s.sg_ready ? val.y : 0;
    };
    run_broadcast_cycle(sim, bc);
}

// one iteration of step 2: ready fragments push their request sizes one
// level up the subtree, caches recording the paths
void step2_iteration(Sim& sim) {
    auto& st = sim.st;
    PhaseConfig pc;
    pc.name = "sg2_request";
    pc.frames_per_macro = words_for(sim, w_ids(sim, 2, 8));
    pc.fixed_macro_rounds = 2;
    sim.run(pc, [&](Env& env) {
        SolVertex& s = st[env.id()];
        if (!active_frag(s)) return;
        if (env.round() == 1) {
            if (s.subtree_parent_port != kNoPort && !s.terminated && s.sg_ready && !s.sg_sent &&
                !s.is_subtree_root && s.sg_total > 0) {
                env.send(s.subtree_parent_port,
                         make_msg(MsgKind::SgRequest, w_ids(sim, 2, 8), s.frag_id, s.sg_total,
                                  0 /* original */, sim.phase2_index));
                s.cached_request = s.sg_total;
                s.sg_sent = true;
                account(sim, env.id());
            }
            return;
        }
        for (PortId p : env.arrivals()) {
            const Msg* m = env.arrived(p);
            if (!m || m->kind != MsgKind::SgRequest || m->c != 0) continue;
            s.vx_x += m->b;
            s.vx_y += 1;
            s.vx_valid = true;
        }
        account(sim, env.id());
    });

    ConvCycle conv;
    conv.name = "sg2_sum";
    conv.agg = Agg::Sum2;
    conv.input = [&](VertexId v) {
        SolVertex& s = sim.st[v];
        if (!s.vx_valid) return CycleValue{};
        CycleValue out{s.vx_x, s.vx_y, true};
        s.vx_x = s.vx_y = 0;
        s.vx_valid = false;
        return out;
    };
    conv.on_upcast = [&](VertexId v, std::uint64_t x) {
        sim.st[v].cached_upcast += x; // per-vertex cache, accumulated across iterations
    };
    conv.on_subset_partial = [&](VertexId rb, const CycleValue& val) {
        sim.st[rb].cached_submitted += val.x;
    };
    conv.deliver = [&](VertexId leader, const CycleValue& val, const RoutingLabel*) {
        SolVertex& s = sim.st[leader];
        s.sg_child_sum += val.x;
        s.sg_children_seen += static_cast<std::uint32_t>(val.y);
    };
    run_convergecast_cycle(sim, conv);

    // publishing is decided before the cycle so the callback stays pure
    std::vector<bool> due(sim.glob.n, false);
    for (VertexId v = 0; v < sim.glob.n; ++v) {
        SolVertex& s = sim.st[v];
        if (!s.is_leader || !active_frag(s) || s.terminated || s.is_subtree_root || s.sg_published)
            continue;
        if (s.sg_children_seen == s.virt_child_count) due[v] = true;
    }
    BcastCycle bc;
    bc.name = "sg2_ready";
    bc.query = [&](VertexId v) { return !sim.st[v].terminated; };
    bc.publish = [&](VertexId leader) {
        const SolVertex& s = sim.st[leader];
        if (!due[leader]) return CycleValue{};
        return CycleValue{1, s.subset_count + s.sg_child_sum, true};
    };
    bc.on_receive = [&](VertexId v, const CycleValue& val, const RoutingLabel*) {
        SolVertex& s = sim.st[v];
        s.sg_ready = val.x != 0;
        s.sg_total = val.y;
    };
    run_broadcast_cycle(sim, bc);
    for (VertexId v = 0; v < sim.glob.n; ++v)
        if (due[v]) sim.st[v].sg_published = true;
}

// step 3: subtree roots claim disjoint intervals from r_T (rootless variant:
// current slots act as q-slots, the range bottom is effectively 1)
void step3_root_requests(Sim& sim) {
    AllocCycle al;
    al.name = "sg3_alloc";
    al.contribute = [&](VertexId v) -> std::optional<AllocCycle::Item> {
        const SolVertex& s = sim.st[v];
        if (!s.is_leader || !active_frag(s) || !s.is_subtree_root) return std::nullopt;
        std::uint64_t total = s.subset_count + s.sg_child_sum;
        return AllocCycle::Item{s.p_slot, false, total};
    };
    al.deliver = [&](VertexId v, std::uint64_t lo, std::uint64_t size) {
        SolVertex& s = sim.st[v];
        s.sg_interval_lo = lo;
        s.sg_interval_size = size;
        s.sg_has_interval = true;
        s.new_p_slot = static_cast<std::uint32_t>(lo); // the first slot becomes the p-slot
    };
    run_interval_allocation_cycle(sim, al);
}

// one iteration of step 4: fragments one level down receive and split their
// intervals, retracing the caches of step 2
void step4_iteration(Sim& sim, std::uint32_t iter) {
    auto& st = sim.st;

    // 4(a): serving leaders reserve their own prefix and their own base
    // fragment's child allocation before publishing the range bottom
    std::vector<std::uint64_t> bottom(sim.glob.n, 0);
    for (VertexId v = 0; v < sim.glob.n; ++v) {
        SolVertex& s = st[v];
        if (!s.is_leader || !active_frag(s) || s.terminated) continue;
        if (!s.sg_has_interval || s.subtree_depth_of_frag != iter - 1) continue;
        std::uint64_t own_children = s.cached_submitted;
        if (own_children) {
            s.pend_lo = s.sg_interval_lo + s.subset_count;
            s.pend_size = own_children;
            s.pend_valid = true;
        }
        bottom[v] = s.sg_interval_lo + s.subset_count + own_children;
        account(sim, v);
    }

    AllocCycle al;
    al.name = "sg4_alloc";
    al.contribute = [&](VertexId v) -> std::optional<AllocCycle::Item> {
        const SolVertex& s = st[v];
        if (!active_frag(s) || s.terminated) return std::nullopt;
        if (s.is_leader && s.sg_has_interval && s.subtree_depth_of_frag == iter - 1)
            return AllocCycle::Item{s.p_slot, true, bottom[v]};
        if (s.base_root && !s.is_leader && s.q_slot && s.cached_submitted > 0 &&
            s.subtree_depth_of_frag == iter - 1)
            return AllocCycle::Item{s.q_slot, false, s.cached_submitted};
        return std::nullopt;
    };
    al.deliver = [&](VertexId v, std::uint64_t lo, std::uint64_t size) {
        SolVertex& s = st[v];
        s.pend_lo = lo;
        s.pend_size = size;
        s.pend_valid = true;
    };
    run_interval_allocation_cycle(sim, al);

    // cached requests and offers are re-sent after the allocation cycle so
    // their pins cannot be overwritten by extrinsic traffic on shared edges
    PhaseConfig pre;
    pre.name = "sg4_resend";
    pre.frames_per_macro = words_for(sim, w_ids(sim, 2, 8));
    pre.fixed_macro_rounds = 2;
    sim.run(pre, [&](Env& env) {
        SolVertex& s = st[env.id()];
        if (!active_frag(s) || env.round() != 1) return;
        if (s.subtree_parent_port != kNoPort && s.cached_request > 0 &&
            s.subtree_depth_of_frag == iter) {
            env.send(s.subtree_parent_port,
                     make_msg(MsgKind::SgRequest, w_ids(sim, 2, 8), s.frag_id, s.cached_request,
                              1 /* re-send */, sim.phase2_index));
        }
        if (s.subtree_depth_of_frag == iter - 1 && !s.terminated && s.cached_upcast > 0 &&
            !s.base_root) {
            env.send(s.base_parent_port,
                     make_msg(MsgKind::CacheOffer, w_ids(sim, 1, 6), s.cached_upcast,
                              sim.phase2_index));
        }
    });

    // 4(c)+(d): distribute down base trees in port order, answering re-sent
    // requests across MWOEs; everything streams off pinned buffers
    PhaseConfig pc;
    pc.name = "sg4_retrace";
    pc.frames_per_macro = words_for(sim, w_ids(sim, 2));
    sim.run(pc, [&](Env& env) {
        SolVertex& s = st[env.id()];
        if (!active_frag(s)) return;
        auto distribute = [&](std::uint64_t lo, std::uint64_t size) {
            std::uint64_t cur = lo;
            for (PortId p = 0; p < env.degree(); ++p) {
                const Msg* pin = env.buffered(p);
                if (!pin) continue;
                if (pin->kind == MsgKind::SgRequest && pin->c == 1 && pin->d == sim.phase2_index) {
                    env.send(p, make_msg(MsgKind::SgReply, w_ids(sim, 2), cur, pin->b));
                    cur += pin->b;
                } else if (pin->kind == MsgKind::CacheOffer && pin->b == sim.phase2_index) {
                    env.send(p, make_msg(MsgKind::TreeDown, w_ids(sim, 2), cur, pin->a));
                    cur += pin->a;
                }
            }
            if (cur != lo + size)
                throw ProtocolFault("slot interval does not match its cached requests at vertex " +
                                    std::to_string(env.id()));
        };
        if (env.round() == 1) {
            if (s.pend_valid) {
                distribute(s.pend_lo, s.pend_size);
                s.pend_valid = false;
                account(sim, env.id());
            }
            return;
        }
        for (PortId p : env.arrivals()) {
            const Msg* m = env.arrived(p);
            if (!m) continue;
            if (m->kind == MsgKind::TreeDown) {
                distribute(m->a, m->b);
            } else if (m->kind == MsgKind::SgReply) {
                s.sg_got_lo = m->a;
                s.sg_got_size = m->b;
                s.sg_got = true;
                account(sim, env.id());
            }
        }
    });

    ConvCycle conv;
    conv.name = "sg4_up";
    conv.agg = Agg::First;
    conv.input = [&](VertexId v) {
        SolVertex& s = st[v];
        if (!s.sg_got) return CycleValue{};
        CycleValue out{s.sg_got_lo, s.sg_got_size, true};
        s.sg_got = false;
        return out;
    };
    conv.deliver = [&](VertexId leader, const CycleValue& val, const RoutingLabel*) {
        SolVertex& s = st[leader];
        s.sg_interval_lo = val.x;
        s.sg_interval_size = val.y;
        s.sg_has_interval = true;
        s.new_p_slot = 0; // non-root fragments dissolve; the first slot is a q-slot
    };
    run_convergecast_cycle(sim, conv);
}

// step 5: every leader hands single slots to its subsets from the prefix
void step5_assign_subset_slots(Sim& sim) {
    auto& st = sim.st;
    for (VertexId v = 0; v < sim.glob.n; ++v) {
        SolVertex& s = st[v];
        if (!s.is_leader || !active_frag(s) || !s.sg_has_interval) continue;
        // first prefix slot: the new p-slot of subtree roots, the own base
        // fragment's q-slot otherwise
        if (s.is_subtree_root) {
            s.new_q_slot = 0;
        } else {
            s.new_q_slot = static_cast<std::uint32_t>(s.sg_interval_lo);
        }
        account(sim, v);
    }
    AllocCycle al;
    al.name = "sg5_alloc";
    al.contribute = [&](VertexId v) -> std::optional<AllocCycle::Item> {
        const SolVertex& s = st[v];
        if (!active_frag(s)) return std::nullopt;
        if (s.is_leader && s.sg_has_interval)
            return AllocCycle::Item{s.p_slot, true, s.sg_interval_lo + 1};
        if (s.base_root && !s.is_leader && s.q_slot)
            return AllocCycle::Item{s.q_slot, false, 1};
        return std::nullopt;
    };
    al.deliver = [&](VertexId v, std::uint64_t lo, std::uint64_t) {
        st[v].new_q_slot = static_cast<std::uint32_t>(lo);
        account(sim, v);
    };
    run_interval_allocation_cycle(sim, al);
}

// the new leaders announce (fragment id, p-slot, label) over the virtual
// subtrees, still using the old slots
void announce_new_fragments(Sim& sim) {
    auto& st = sim.st;
    for (std::uint32_t level = 0; level <= 3; ++level) {
        // pre-pass keeps the publish callback pure
        std::vector<bool> due(sim.glob.n, false);
        for (VertexId v = 0; v < sim.glob.n; ++v) {
            SolVertex& s = st[v];
            if (!s.is_leader || !active_frag(s)) continue;
            if (level == 0) {
                if (s.is_subtree_root && s.sg_has_interval) {
                    s.new_frag_id = v + 1;
                    s.new_leader_label = s.self_label;
                    s.new_valid = true;
                    s.new_announced = true;
                    due[v] = true;
                    account(sim, v);
                }
            } else if (s.new_valid && !s.new_announced) {
                s.new_announced = true;
                due[v] = true;
            }
        }
        BcastCycle bc;
        bc.name = "sg_announce";
        bc.wide = true;
        bc.publish = [&](VertexId leader) -> CycleValue {
            const SolVertex& s = st[leader];
            if (!due[leader]) return CycleValue{};
            return CycleValue{s.new_frag_id, s.new_p_slot, true};
        };
        bc.publish_payload = [&](VertexId leader) -> const RoutingLabel* {
            return &st[leader].new_leader_label;
        };
        bc.on_receive = [&](VertexId v, const CycleValue& val, const RoutingLabel* payload) {
            SolVertex& s = st[v];
            s.new_frag_id = val.x;
            s.new_p_slot = static_cast<std::uint32_t>(val.y);
            if (payload) s.new_leader_label = *payload;
            s.new_valid = true;
        };
        run_broadcast_cycle(sim, bc);
        if (level == 3) break;

        // cross the subtree edges one level down; children ping afresh so
        // no stale buffer state is trusted
        PhaseConfig pc;
        pc.name = "sg_announce_hop";
        pc.fixed_macro_rounds = 3;
        pc.frames_per_macro = sim.glob.w_wide;
        LabelCodec codec = sim.codec();
        sim.run(pc, [&](Env& env) {
            SolVertex& s = st[env.id()];
            if (!active_frag(s)) return;
            if (env.round() == 1) {
                if (s.subtree_parent_port != kNoPort && !s.new_valid)
                    env.send(s.subtree_parent_port,
                             make_msg(MsgKind::VPing, w_ids(sim, 1, 9), s.frag_id, kSubtreePing,
                                      sim.phase2_index));
                return;
            }
            if (env.round() == 2) {
                if (!s.new_valid) return;
                for (PortId p : env.arrivals()) {
                    const Msg* m = env.arrived(p);
                    if (!m || m->kind != MsgKind::VPing || m->b != kSubtreePing) continue;
                    Msg out = make_msg(MsgKind::VReply, w_ids(sim, 2), s.new_frag_id, s.new_p_slot);
                    codec.encode(s.new_leader_label, out);
                    env.send(p, out);
                }
                return;
            }
            for (PortId p : env.arrivals()) {
                const Msg* m = env.arrived(p);
                if (!m || m->kind != MsgKind::VReply) continue;
                if (s.new_valid) continue; // already informed through our own fragment
                s.vx_x = m->a;
                s.vx_y = m->b;
                s.vx_valid = true;
                s.own_payload_label = codec.decode(*m);
                s.own_has_payload_label = true;
                account(sim, env.id());
            }
        });

        ConvCycle conv;
        conv.name = "sg_announce_up";
        conv.agg = Agg::First;
        conv.wide = true;
        conv.input = [&](VertexId v) {
            SolVertex& s = st[v];
            if (!s.vx_valid) return CycleValue{};
            CycleValue out{s.vx_x, s.vx_y, true};
            s.vx_x = s.vx_y = 0;
            s.vx_valid = false;
            return out;
        };
        conv.payload_label = [&](VertexId v) -> const RoutingLabel* {
            SolVertex& s = st[v];
            return s.own_has_payload_label ? &s.own_payload_label : nullptr;
        };
        conv.deliver = [&](VertexId leader, const CycleValue& val, const RoutingLabel* payload) {
            SolVertex& s = st[leader];
            if (s.new_valid) return;
            s.new_frag_id = val.x;
            s.new_p_slot = static_cast<std::uint32_t>(val.y);
            if (payload) s.new_leader_label = *payload;
            s.new_valid = true;
            s.new_announced = false; // publish at the next level
        };
        run_convergecast_cycle(sim, conv);
    }
}

} // namespace

void generate_slot_set(Sim& sim) {
    step1_child_count(sim);
    for (std::uint32_t j = 1; j <= 3; ++j) step2_iteration(sim);
    step3_root_requests(sim);
    std::uint64_t new_total = sim.alloc_end - 1;
    for (std::uint32_t j = 1; j <= 3; ++j) step4_iteration(sim, j);
    step5_assign_subset_slots(sim);
    announce_new_fragments(sim);

    // apply the new set and clear the generation caches
    for (VertexId v = 0; v < sim.glob.n; ++v) {
        SolVertex& s = sim.st[v];
        if (active_frag(s)) {
            if (!s.new_valid)
                throw ProtocolFault("vertex " + std::to_string(v) + " missed the new slot announcement");
            s.frag_id = s.new_frag_id;
            s.p_slot = s.new_p_slot;
            s.leader_label = s.new_leader_label;
            s.have_leader_label = true;
            s.is_leader = (static_cast<std::uint64_t>(v) + 1 == s.new_frag_id);
            if (s.base_root) s.q_slot = s.is_leader ? 0 : s.new_q_slot;
            s.subset_count =
                s.is_leader ? static_cast<std::uint32_t>(s.subset_count + s.sg_child_sum) : 0;
        }
        s.cached_upcast = 0;
        s.cached_request = 0;
        s.cached_submitted = 0;
        s.sg_child_sum = 0;
        s.sg_children_seen = 0;
        s.virt_child_count = 0;
        s.sg_ready = false;
        s.sg_sent = false;
        s.sg_published = false;
        s.new_announced = false;
        s.sg_total = 0;
        s.sg_has_interval = false;
        s.sg_got = false;
        s.pend_valid = false;
        s.new_valid = false;
        s.own_has_payload_label = false;
        account(sim, v);
    }
    sim.glob.max_slot = static_cast<std::uint32_t>(new_total);
}

} // namespace congest
