#include "congest/solver.hpp"

namespace congest {

namespace {

std::uint64_t frag_tmp_bits(const Sim& sim, const SolVertex& s) {
    std::uint32_t b = sim.glob.id_bits;
    std::uint32_t rb = sim.glob.rank_bits;
    std::uint64_t bits = 4; // flags
    if (s.local_cand.valid()) bits += rb + 2 * b;
    if (s.best_cand.valid()) bits += rb + 2 * b;
    if (s.retrace_port != kNoPort) bits += b;
    if (s.cand_reports) bits += b;
    if (s.diam_reports || s.h1 || s.h2 || s.diam_below) bits += 4 * b;
    return bits;
}

std::uint64_t virt_bits(const Sim& sim, const SolVertex& s) {
    if (sim.stage != Stage::Phase2) return 0;
    std::uint32_t b = sim.glob.id_bits;
    std::uint32_t rb = sim.glob.rank_bits;
    std::uint64_t bits = 12; // assorted flags and the 2-bit subtree depth
    bits += 3 * b; // color, parent color, pre-shift color
    if (s.partner != kNoValue) bits += b;
    if (s.vparent != kNoValue) bits += b;
    if (s.subtree_parent != kNoValue) bits += b;
    if (s.matched_child != kNoValue) bits += b;
    if (s.is_vadj) bits += b + rb + b; // MWOE record: port, rank, neighbor fragment
    if (s.subtree_parent_port != kNoPort) bits += b;
    if (s.vx_valid) bits += 2 * rb;
    return bits;
}

std::uint64_t slotgen_bits(const Sim& sim, const SolVertex& s) {
    if (sim.stage != Stage::Phase2) return 0;
    std::uint32_t b = sim.glob.id_bits;
    std::uint64_t bits = 4; // flags
    if (s.cached_upcast) bits += b;
    if (s.cached_request) bits += b;
    if (s.cached_submitted) bits += b;
    if (s.sg_child_sum) bits += b;
    if (s.sg_children_seen) bits += b;
    if (s.virt_child_count) bits += b;
    if (s.sg_total) bits += b;
    if (s.sg_has_interval) bits += 2 * b;
    if (s.sg_got) bits += 2 * b;
    if (s.pend_valid) bits += 2 * b;
    if (s.new_valid)
        bits += 3 * b + sim.codec().label_bits(s.new_leader_label);
    return bits;
}

} // namespace

void account(Sim& sim, VertexId v) {
    const SolVertex& s = sim.st[v];
    MemoryLedger& led = sim.engine.ledger(v);
    std::uint32_t b = sim.glob.id_bits;
    std::uint32_t rb = sim.glob.rank_bits;
    LabelCodec codec = sim.codec();

    led.set(Reg::Bfs, s.joined ? 4ull * b + 1 : 0);
    led.set(Reg::BfsTmp, (s.joined && !s.depth_done) ? 3ull * b : 0);
    led.set(Reg::SubtreeSize, s.subtree_size ? (s.routed ? 1ull * b : 3ull * b) : 0);
    led.set(Reg::RouteTable, s.routed ? table_bits(s.table, sim.glob.n) : 0);
    led.set(Reg::SelfLabel, s.routed ? codec.label_bits(s.self_label) : 0);
    led.set(Reg::LeaderLabel, s.have_leader_label ? codec.label_bits(s.leader_label) : 0);
    led.set(Reg::Frag, s.frag_id ? 3ull * b + 4 : 0);
    led.set(Reg::FragTmp, s.frag_id ? frag_tmp_bits(sim, s) : 0);
    led.set(Reg::Base, s.base_id ? 3ull * b + 1 : 0);
    std::uint64_t slot_meta = 0;
    if (s.p_slot) slot_meta += b;
    if (s.q_slot) slot_meta += b;
    if (s.max_slot) slot_meta += b;
    if (s.subset_count) slot_meta += b;
    if (slot_meta) slot_meta += 2;
    led.set(Reg::SlotMeta, slot_meta);
    std::uint64_t cyc = 0;
    if (s.own_valid) {
        cyc += 2ull * rb + 2;
        if (s.own_has_payload_label) cyc += codec.label_bits(s.own_payload_label);
    }
    if (s.cyc_recv) cyc += b;
    led.set(Reg::CycleOwn, cyc);
    led.set(Reg::Virt, virt_bits(sim, s));
    led.set(Reg::SlotGen, slotgen_bits(sim, s));
    led.set(Reg::MstEdges, static_cast<std::uint64_t>(s.mst_ports.size()) * b);
    std::uint64_t pwa = 0;
    if (sim.cfg.mode == Mode::Pwa) {
        pwa = b + 2ull * rb + 1;
        if (s.pwa_done) pwa += 2ull * rb;
    }
    led.set(Reg::Pwa, pwa);
}

std::uint64_t audited_bits(const Sim& sim, VertexId v) {
    std::uint64_t total = 0;
    const MemoryLedger& led = sim.engine.ledger(v);
    for (std::size_t i = 0; i < static_cast<std::size_t>(Reg::Count_); ++i)
        total += led.get(static_cast<Reg>(i));
    return total;
}

} // namespace congest
