#include "congest/cycle.hpp"

#include <algorithm>

namespace congest {

std::uint32_t depth_of_slot(std::uint32_t slot, std::uint64_t t, std::uint32_t d_t) {
    if (t < slot || t > static_cast<std::uint64_t>(slot) + d_t)
        throw ProtocolFault("round outside the slot's window");
    return static_cast<std::uint32_t>(d_t + slot - t);
}

bool fold_value(Agg agg, CycleValue& acc, const CycleValue& in, const UserCombine* user) {
    if (!in.has) return false;
    if (!acc.has) {
        acc = in;
        return true;
    }
    switch (agg) {
    case Agg::MinPair:
        if (in.x < acc.x || (in.x == acc.x && in.y < acc.y)) {
            acc = in;
            return true;
        }
        return false;
    case Agg::Sum2:
        acc.x += in.x;
        acc.y += in.y;
        return true;
    case Agg::Or1: {
        std::uint64_t nx = acc.x | in.x;
        bool ch = nx != acc.x;
        acc.x = nx;
        return ch;
    }
    case Agg::First:
        return false; // incumbent wins
    case Agg::User: {
        if (!user || !*user) throw ProtocolFault("user aggregation without a combiner");
        std::uint64_t nx = (*user)(acc.x, in.x);
        bool ch = nx != acc.x;
        acc.x = nx;
        return ch;
    }
    }
    return false;
}

namespace {

std::uint32_t value_field_bits(const Sim& sim) {
    return std::max(sim.glob.rank_bits, sim.glob.id_bits);
}

} // namespace

void compute_cycle_widths(Sim& sim) {
    LabelCodec codec = sim.codec();
    std::uint32_t label_cap = codec.label_bits_cap(sim.glob.n);
    std::uint32_t value_bits = kTagBits + 8 + 2 * value_field_bits(sim) + sim.glob.id_bits;
    std::uint32_t wb = sim.engine.word_bits();
    sim.glob.w_cyc = static_cast<std::uint32_t>(ceil_div(value_bits + label_cap, wb));
    sim.glob.w_wide = static_cast<std::uint32_t>(ceil_div(value_bits + 2ull * label_cap, wb));
}

namespace {

std::uint32_t ext_base_bits(const Sim& sim) {
    return kTagBits + 8 + 2 * value_field_bits(sim) + sim.glob.id_bits;
}

std::uint32_t intrinsic_width(const Sim& sim, bool wide) {
    std::uint32_t bits = kTagBits + 2 + 2 * value_field_bits(sim);
    if (wide) bits += sim.codec().label_bits_cap(sim.glob.n);
    return static_cast<std::uint32_t>(ceil_div(bits, sim.engine.word_bits()));
}

constexpr std::uint64_t kPtConv = 0, kPtP = 1, kPtQ = 2;
constexpr std::uint64_t kFlagPayload = 4, kFlagRoute = 8, kFlagHas = 16;
constexpr std::uint64_t kPinBaseTree = 2;

struct ExtMsg {
    std::uint64_t ptype = kPtConv;
    CycleValue val;
    std::uint64_t origin_frag = 0;
    RoutingLabel route;
    bool has_route = false;
    RoutingLabel payload;
    bool has_payload = false;
};

Msg encode_ext(const Sim& sim, MsgKind kind, const ExtMsg& em, std::int32_t slot_tag) {
    const LabelCodec codec = sim.codec();
    Msg m;
    m.kind = kind;
    m.a = em.ptype | (em.has_payload ? kFlagPayload : 0) | (em.has_route ? kFlagRoute : 0) |
          (em.val.has ? kFlagHas : 0);
    m.b = em.val.x;
    m.c = em.val.y;
    m.d = em.origin_frag;
    m.width_bits = ext_base_bits(sim);
    if (em.has_route) codec.encode(em.route, m);
    if (em.has_payload) codec.encode(em.payload, m);
    m.slot_tag = slot_tag;
    return m;
}

ExtMsg decode_ext(const Sim& sim, const Msg& m) {
    const LabelCodec codec = sim.codec();
    ExtMsg em;
    em.ptype = m.a & 3;
    em.has_payload = (m.a & kFlagPayload) != 0;
    em.has_route = (m.a & kFlagRoute) != 0;
    em.val.has = (m.a & kFlagHas) != 0;
    em.val.x = m.b;
    em.val.y = m.c;
    em.origin_frag = m.d;
    std::size_t off = 0;
    if (em.has_route) {
        em.route = codec.decode(m, off);
        off += 2 + 2 * em.route.light_edges.size();
    }
    if (em.has_payload) em.payload = codec.decode(m, off);
    return em;
}

struct Injection {
    std::uint32_t slot = 0;
    ExtMsg msg;
};

enum class ExtKind { Conv, Bcast, Alloc };

struct ExtSpec {
    ExtKind kind;
    const char* name;
    Agg agg = Agg::First;
    UserCombine user;
    bool wide = false;
    std::function<std::optional<Injection>(VertexId)> injection;
    std::function<void(VertexId, const ExtMsg&)> deliver;
};

// The pipelined extrinsic step: the window of slot i owns depth d(T)+i-t at
// round t, so upcasts of different slots never meet; replies are routed down
// by label. Runs exactly 2 d(T) + S macro-rounds.
void run_extrinsic(Sim& sim, const ExtSpec& spec, CycleRecord& rec) {
    auto& st = sim.st;
    std::uint32_t d_t = sim.glob.d_t;
    std::uint32_t S = sim.glob.max_slot;
    LabelCodec codec = sim.codec();
    std::uint32_t w = spec.wide ? sim.glob.w_wide : sim.glob.w_cyc;
    VertexId r_t = sim.glob.root;

    // r_T's working registers for the whole step
    CycleValue root_msg;
    std::uint64_t root_msg_frag = 0;
    RoutingLabel root_payload;
    bool root_has_payload = false;
    std::uint64_t rangebottom = 1;

    auto root_ledger_sync = [&](Env& env) {
        std::uint64_t bits = 0;
        if (spec.kind == ExtKind::Bcast && root_msg.has)
            bits = 2ull * value_field_bits(sim) + sim.glob.id_bits +
                   (root_has_payload ? codec.label_bits(root_payload) : 0);
        if (spec.kind == ExtKind::Alloc) bits = 2ull * value_field_bits(sim);
        env.ledger().set(Reg::RootMsg, bits);
        sim.metrics.root_msg_peak_bits = std::max(sim.metrics.root_msg_peak_bits, bits);
    };

    PhaseConfig pc;
    pc.name = std::string(spec.name) + ".ext";
    pc.frames_per_macro = w;
    pc.fixed_macro_rounds = 2ull * d_t + S;

    auto route_down = [&](Env& env, ExtMsg reply) {
        reply.ptype = kPtConv;
        SolVertex& s = st[env.id()];
        RouteDecision rd = route_next_hop(s.table, reply.route);
        if (rd.deliver) {
            spec.deliver(env.id(), reply);
            account(sim, env.id());
            return;
        }
        env.send(rd.forward_port, encode_ext(sim, MsgKind::CycDown, reply, -1));
    };

    auto handler = [&](Env& env) {
        SolVertex& s = st[env.id()];
        std::uint64_t t = env.round();
        auto inj = spec.injection ? spec.injection(env.id()) : std::nullopt;
        if (t == 1 && inj) {
            std::uint64_t when = static_cast<std::uint64_t>(inj->slot) + d_t - s.depth;
            if (when > 1) env.wake_at(when);
        }

        std::int64_t slot_here = static_cast<std::int64_t>(t) + s.depth - d_t;
        CycleValue acc;
        ExtMsg accm;
        std::uint64_t transient = 0;
        auto note_transient = [&](std::uint64_t bits) {
            if (bits > transient) {
                env.ledger().set(Reg::CycleTmp, bits);
                transient = bits;
            }
        };

        std::vector<ExtMsg> downs;
        for (PortId p : env.arrivals()) {
            const Msg* m = env.arrived(p);
            if (!m) continue;
            if (m->kind == MsgKind::CycDown) {
                downs.push_back(decode_ext(sim, *m));
                continue;
            }
            if (m->kind != MsgKind::CycUp) continue;
            if (slot_here < 1 || slot_here > static_cast<std::int64_t>(S))
                throw ProtocolFault("extrinsic message outside every slot window");
            if (sim.cfg.collect_reception_trace)
                sim.reception_trace.push_back(
                    ReceptionEvent{t, env.id(), static_cast<std::int32_t>(slot_here)});
            ExtMsg em = decode_ext(sim, *m);
            if (spec.kind != ExtKind::Conv && acc.has)
                throw ProtocolFault("two messages in one p/q window");
            bool changed = fold_value(spec.agg, acc, em.val, &spec.user);
            if (changed) {
                em.val = acc;
                accm = em;
            } else {
                accm.val = acc;
            }
            note_transient(2ull * value_field_bits(sim) +
                           (em.has_route ? codec.label_bits(em.route) : 0) +
                           (em.has_payload ? codec.label_bits(em.payload) : 0));
        }

        if (inj && slot_here == static_cast<std::int64_t>(inj->slot)) {
            bool changed = fold_value(spec.agg, acc, inj->msg.val, &spec.user);
            if (changed) {
                ExtMsg own = inj->msg;
                own.val = acc;
                accm = own;
            } else {
                accm.val = acc;
            }
            if (spec.kind == ExtKind::Bcast && inj->msg.ptype == kPtP)
                spec.deliver(env.id(), inj->msg); // the leader serves its own base fragment
        }

        if (acc.has) {
            accm.val = acc;
            if (s.depth > 0) {
                env.send(s.parent_port,
                         encode_ext(sim, MsgKind::CycUp, accm, static_cast<std::int32_t>(slot_here)));
            } else {
                switch (spec.kind) {
                case ExtKind::Conv: {
                    if (!accm.has_route) throw ProtocolFault("aggregate reached r_T without a label");
                    route_down(env, accm);
                    break;
                }
                case ExtKind::Bcast: {
                    if (accm.ptype == kPtP) {
                        root_msg = accm.val;
                        root_msg_frag = accm.origin_frag;
                        root_payload = accm.payload;
                        root_has_payload = accm.has_payload;
                        root_ledger_sync(env);
                    } else if (accm.ptype == kPtQ) {
                        ExtMsg reply;
                        reply.val = root_msg;
                        reply.origin_frag = root_msg_frag;
                        reply.route = accm.route;
                        reply.has_route = true;
                        reply.payload = root_payload;
                        reply.has_payload = root_has_payload;
                        route_down(env, reply);
                    } else {
                        throw ProtocolFault("conv-typed message in a broadcast cycle");
                    }
                    break;
                }
                case ExtKind::Alloc: {
                    if (accm.ptype == kPtP) {
                        rangebottom = accm.val.x;
                        root_ledger_sync(env);
                    } else if (accm.ptype == kPtQ) {
                        ExtMsg reply;
                        reply.val = CycleValue{rangebottom, accm.val.x, true};
                        reply.origin_frag = accm.origin_frag;
                        reply.route = accm.route;
                        reply.has_route = true;
                        rangebottom += accm.val.x;
                        root_ledger_sync(env);
                        route_down(env, reply);
                    } else {
                        throw ProtocolFault("conv-typed message in an allocation cycle");
                    }
                    break;
                }
                }
            }
        }

        for (ExtMsg& em : downs) {
            note_transient(2ull * value_field_bits(sim) + codec.label_bits(em.route) +
                           (em.has_payload ? codec.label_bits(em.payload) : 0));
            RouteDecision rd = route_next_hop(s.table, em.route);
            if (rd.deliver) {
                spec.deliver(env.id(), em);
                account(sim, env.id());
            } else {
                env.send(rd.forward_port, encode_ext(sim, MsgKind::CycDown, em, -1));
            }
        }
        if (transient) env.ledger().set(Reg::CycleTmp, 0);
    };

    sim.run(pc, handler);
    sim.alloc_end = rangebottom;
    sim.engine.ledger(r_t).set(Reg::RootMsg, 0);
    rec.extrinsic_frame_rounds = sim.metrics.phases.back().frame_rounds;
    rec.w = w;
}

// intrinsic convergecast over every base-fragment tree
PhaseStats run_intrinsic_convergecast(Sim& sim, const ConvCycle& spec) {
    auto& st = sim.st;
    LabelCodec codec = sim.codec();
    PhaseConfig pc;
    pc.name = std::string(spec.name) + ".int";
    pc.frames_per_macro = intrinsic_width(sim, spec.wide);

    auto send_up_or_finish = [&](Env& env, SolVertex& s) {
        CycleValue in = spec.input ? spec.input(env.id()) : CycleValue{};
        CycleValue acc = s.own_valid ? CycleValue{s.own_x, s.own_y, true} : CycleValue{};
        bool own_changed = fold_value(spec.agg, acc, in, &spec.user);
        if (own_changed && spec.wide && spec.payload_label) {
            const RoutingLabel* pay = spec.payload_label(env.id());
            if (pay) {
                s.own_payload_label = *pay;
                s.own_has_payload_label = true;
            }
        }
        s.own_x = acc.x;
        s.own_y = acc.y;
        s.own_valid = acc.has;
        if (spec.on_upcast && in.has) spec.on_upcast(env.id(), in.x);
        if (s.base_root) {
            if (spec.on_subset_partial && s.own_valid) spec.on_subset_partial(env.id(), acc);
            account(sim, env.id());
            return;
        }
        Msg m = make_msg(MsgKind::TreeUp, kTagBits + 2 + 2 * value_field_bits(sim),
                         s.own_valid ? 1 : 0, s.own_x, s.own_y);
        if (s.own_has_payload_label) {
            m.a |= 2;
            codec.encode(s.own_payload_label, m);
        }
        env.send(s.base_parent_port, m);
        s.own_valid = false;
        s.own_x = s.own_y = 0;
        s.own_has_payload_label = false;
        account(sim, env.id());
    };

    auto handler = [&](Env& env) {
        SolVertex& s = st[env.id()];
        if (s.small_component || !s.base_id) return;
        if (env.round() == 1) {
            if (s.base_child_count == 0) send_up_or_finish(env, s);
            return;
        }
        for (PortId p : env.arrivals()) {
            const Msg* m = env.arrived(p);
            if (!m || m->kind != MsgKind::TreeUp) continue;
            CycleValue in{m->b, m->c, (m->a & 1) != 0};
            CycleValue acc = s.own_valid ? CycleValue{s.own_x, s.own_y, true} : CycleValue{};
            bool changed = fold_value(spec.agg, acc, in, &spec.user);
            if (changed && (m->a & 2)) {
                s.own_payload_label = codec.decode(*m);
                s.own_has_payload_label = true;
            }
            s.own_x = acc.x;
            s.own_y = acc.y;
            s.own_valid = acc.has;
            if (spec.on_upcast && in.has) spec.on_upcast(env.id(), in.x);
            ++s.cyc_recv;
            if (s.cyc_recv == s.base_child_count) {
                s.cyc_recv = 0;
                send_up_or_finish(env, s);
            }
            account(sim, env.id());
        }
    };
    sim.run(pc, handler);
    return sim.metrics.phases.back();
}

} // namespace

void run_convergecast_cycle(Sim& sim, const ConvCycle& spec) {
    if (sim.glob.max_slot == 0) throw ProtocolFault("convergecast cycle without a slot set");
    CycleRecord rec;
    rec.kind = CycleKind::Convergecast;
    rec.max_slot = sim.glob.max_slot;
    rec.d_t = sim.glob.d_t;
    rec.k_b = sim.glob.k_b;
    rec.d_b = sim.glob.d_b;

    PhaseStats intr = run_intrinsic_convergecast(sim, spec);
    rec.intrinsic_frame_rounds = intr.frame_rounds;

    ExtSpec ext;
    ext.kind = ExtKind::Conv;
    ext.name = spec.name;
    ext.agg = spec.agg;
    ext.user = spec.user;
    ext.wide = spec.wide;
    ext.injection = [&](VertexId v) -> std::optional<Injection> {
        SolVertex& s = sim.st[v];
        if (!s.base_root || s.small_component || !s.own_valid || s.p_slot == 0) return std::nullopt;
        Injection inj;
        inj.slot = s.p_slot;
        inj.msg.ptype = kPtConv;
        inj.msg.val = CycleValue{s.own_x, s.own_y, true};
        inj.msg.origin_frag = s.frag_id;
        inj.msg.route = s.leader_label;
        inj.msg.has_route = true;
        if (s.own_has_payload_label) {
            inj.msg.payload = s.own_payload_label;
            inj.msg.has_payload = true;
        }
        return inj;
    };
    ext.deliver = [&](VertexId v, const ExtMsg& em) {
        if (spec.deliver) spec.deliver(v, em.val, em.has_payload ? &em.payload : nullptr);
    };
    run_extrinsic(sim, ext, rec);

    for (VertexId v = 0; v < sim.glob.n; ++v) {
        SolVertex& s = sim.st[v];
        if (s.own_valid || s.own_has_payload_label || s.cyc_recv) {
            s.own_valid = false;
            s.own_x = s.own_y = 0;
            s.own_has_payload_label = false;
            s.cyc_recv = 0;
            account(sim, v);
        }
    }
    sim.metrics.cycles.push_back(rec);
    sim.metrics.cycles_total += 1;
}

void run_broadcast_cycle(Sim& sim, const BcastCycle& spec) {
    if (sim.glob.max_slot == 0) throw ProtocolFault("broadcast cycle without a slot set");
    CycleRecord rec;
    rec.kind = CycleKind::Broadcast;
    rec.max_slot = sim.glob.max_slot;
    rec.d_t = sim.glob.d_t;
    rec.k_b = sim.glob.k_b;
    rec.d_b = sim.glob.d_b;

    ExtSpec ext;
    ext.kind = ExtKind::Bcast;
    ext.name = spec.name;
    ext.agg = Agg::First;
    ext.wide = spec.wide;
    ext.injection = [&](VertexId v) -> std::optional<Injection> {
        SolVertex& s = sim.st[v];
        if (s.small_component) return std::nullopt;
        if (s.is_leader && s.p_slot) {
            CycleValue pub = spec.publish ? spec.publish(v) : CycleValue{};
            if (!pub.has) return std::nullopt;
            Injection inj;
            inj.slot = s.p_slot;
            inj.msg.ptype = kPtP;
            inj.msg.val = pub;
            inj.msg.origin_frag = s.frag_id;
            if (spec.wide && spec.publish_payload) {
                const RoutingLabel* pay = spec.publish_payload(v);
                if (pay) {
                    inj.msg.payload = *pay;
                    inj.msg.has_payload = true;
                }
            }
            return inj;
        }
        if (s.base_root && s.q_slot) {
            if (spec.query && !spec.query(v)) return std::nullopt;
            Injection inj;
            inj.slot = s.q_slot;
            inj.msg.ptype = kPtQ;
            inj.msg.val = CycleValue{0, 0, true};
            inj.msg.origin_frag = s.frag_id;
            inj.msg.route = s.self_label;
            inj.msg.has_route = true;
            return inj;
        }
        return std::nullopt;
    };
    ext.deliver = [&](VertexId v, const ExtMsg& em) {
        SolVertex& s = sim.st[v];
        // a reply from another fragment's range means our own leader was silent
        if (em.origin_frag != s.frag_id || !em.val.has) return;
        s.own_x = em.val.x;
        s.own_y = em.val.y;
        s.own_valid = true;
        if (em.has_payload) {
            s.own_payload_label = em.payload;
            s.own_has_payload_label = true;
        }
    };
    run_extrinsic(sim, ext, rec);

    // intrinsic step: fresh pins, then subset roots flood their responses
    LabelCodec codec = sim.codec();
    PhaseConfig pc;
    pc.name = std::string(spec.name) + ".flood";
    pc.frames_per_macro = intrinsic_width(sim, spec.wide);
    auto& st = sim.st;
    sim.run(pc, [&](Env& env) {
        SolVertex& s = st[env.id()];
        if (s.small_component || !s.base_id) return;
        auto flood = [&](std::uint64_t x, std::uint64_t y, const RoutingLabel* pay) {
            Msg m = make_msg(MsgKind::TreeDown, kTagBits + 2 + 2 * value_field_bits(sim),
                             pay ? 1 : 0, x, y);
            if (pay) codec.encode(*pay, m);
            for (PortId p = 0; p < env.degree(); ++p) {
                const Msg* pin = env.buffered(p);
                if (pin && pin->kind == MsgKind::TreePin && pin->a == kPinBaseTree &&
                    env.buffer_age(p) + 2 <= env.round())
                    env.send(p, m);
            }
        };
        if (env.round() == 1) {
            if (s.base_parent_port != kNoPort)
                env.send(s.base_parent_port, make_msg(MsgKind::TreePin, kTagBits + 2, kPinBaseTree));
            if (s.base_root) env.wake_at(2);
            return;
        }
        if (env.round() == 2 && s.base_root) {
            if (s.own_valid) {
                if (spec.on_receive)
                    spec.on_receive(env.id(), CycleValue{s.own_x, s.own_y, true},
                                    s.own_has_payload_label ? &s.own_payload_label : nullptr);
                flood(s.own_x, s.own_y, s.own_has_payload_label ? &s.own_payload_label : nullptr);
                s.own_valid = false;
                s.own_has_payload_label = false;
            }
            account(sim, env.id());
            return;
        }
        for (PortId p : env.arrivals()) {
            const Msg* m = env.arrived(p);
            if (!m || m->kind != MsgKind::TreeDown) continue;
            RoutingLabel pay;
            bool has_pay = (m->a & 1) != 0;
            if (has_pay) pay = codec.decode(*m);
            if (spec.on_receive)
                spec.on_receive(env.id(), CycleValue{m->b, m->c, true}, has_pay ? &pay : nullptr);
            flood(m->b, m->c, has_pay ? &pay : nullptr);
            account(sim, env.id());
        }
    });
    rec.intrinsic_frame_rounds = sim.metrics.phases.back().frame_rounds;
    sim.metrics.cycles.push_back(rec);
    sim.metrics.cycles_total += 1;
}

void run_interval_allocation_cycle(Sim& sim, const AllocCycle& spec) {
    if (sim.glob.max_slot == 0) throw ProtocolFault("allocation cycle without a slot set");
    CycleRecord rec;
    rec.kind = CycleKind::IntervalAllocation;
    rec.max_slot = sim.glob.max_slot;
    rec.d_t = sim.glob.d_t;
    rec.k_b = sim.glob.k_b;
    rec.d_b = sim.glob.d_b;

    ExtSpec ext;
    ext.kind = ExtKind::Alloc;
    ext.name = spec.name;
    ext.agg = Agg::First;
    ext.injection = [&](VertexId v) -> std::optional<Injection> {
        auto item = spec.contribute(v);
        if (!item) return std::nullopt;
        Injection inj;
        inj.slot = item->slot;
        inj.msg.ptype = item->is_p ? kPtP : kPtQ;
        inj.msg.val = CycleValue{item->value, 0, true};
        inj.msg.origin_frag = sim.st[v].frag_id;
        if (!item->is_p) {
            inj.msg.route = sim.st[v].self_label;
            inj.msg.has_route = true;
        }
        return inj;
    };
    ext.deliver = [&](VertexId v, const ExtMsg& em) {
        if (spec.deliver) spec.deliver(v, em.val.x, em.val.y);
    };
    run_extrinsic(sim, ext, rec);
    sim.metrics.cycles.push_back(rec);
    sim.metrics.cycles_total += 1;
}

} // namespace congest
