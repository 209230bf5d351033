#include "congest/engine.hpp"

#include <algorithm>

namespace congest {

std::uint32_t Env::degree() const { return eng_.graph().degree(v_); }
VertexId Env::neighbor(PortId p) const { return eng_.graph().neighbor(v_, p); }
WeightRank Env::rank_at(PortId p) const { return eng_.graph().rank_at(v_, p); }
std::uint32_t Env::edge_at(PortId p) const { return eng_.graph().edge_at(v_, p); }

const Msg* Env::arrived(PortId p) const {
    const PortBuffer& pb = eng_.buffers_[v_][p];
    if (pb.arrival == eng_.global_round_ && pb.arrival != 0) return &pb.msg;
    return nullptr;
}

const Msg* Env::buffered(PortId p) const {
    const PortBuffer& pb = eng_.buffers_[v_][p];
    if (pb.arrival == 0) return nullptr;
    return &pb.msg;
}

std::uint64_t Env::buffer_age(PortId p) const {
    const PortBuffer& pb = eng_.buffers_[v_][p];
    if (pb.arrival == 0) return kNoValue;
    return eng_.global_round_ - pb.arrival;
}

MemoryLedger& Env::ledger() { return eng_.ledgers_[v_]; }

void Env::send(PortId p, Msg m) {
    if (p >= degree()) throw ProtocolFault("send on invalid port");
    if (m.width_bits == 0) throw ProtocolFault("message width not set");
    std::uint64_t cap = static_cast<std::uint64_t>(eng_.cur_w_) * eng_.word_bits_;
    if (m.width_bits > cap)
        throw ProtocolFault("message exceeds macro-round capacity (" + std::to_string(m.width_bits) +
                            " bits > " + std::to_string(cap) + ")");
    // one logical message per port per macro-round and direction
    std::uint64_t key = eng_.global_round_;
    std::uint64_t& mark = eng_.sent_on_port_round_[eng_.port_key(v_, p)];
    if (mark == key) throw ProtocolFault("duplicate send on port in one macro-round");
    mark = key;
    std::uint64_t frames = ceil_div(m.width_bits, eng_.word_bits_);
    eng_.cur_stats_->frames += frames;
    eng_.cur_stats_->logical_messages += 1;
    eng_.pending_.push_back(Engine::PendingSend{v_, p, std::move(m)});
}

void Env::wake_at(std::uint64_t phase_round) {
    if (phase_round <= round_) throw ProtocolFault("wake_at must target a future round");
    std::uint64_t global = eng_.global_round_ + (phase_round - round_);
    eng_.wakes_[global].push_back(v_);
}

Engine::Engine(const WeightedGraph& g, EngineConfig cfg)
    : g_(&g), cfg_(cfg), word_bits_(cfg.word_bits_for(g.vertex_count())),
      budget_bits_(cfg.budget_bits_for(g.vertex_count())) {
    std::uint32_t n = g.vertex_count();
    ledgers_.resize(n);
    buffers_.resize(n);
    reverse_port_.resize(n);
    arrivals_.resize(n);
    port_offset_.resize(n + 1, 0);
    for (VertexId v = 0; v < n; ++v) {
        buffers_[v].resize(g.degree(v));
        reverse_port_[v].resize(g.degree(v));
        port_offset_[v + 1] = port_offset_[v] + g.degree(v);
    }
    sent_on_port_round_.assign(port_offset_[n], 0);
    for (VertexId v = 0; v < n; ++v)
        for (PortId p = 0; p < g.degree(v); ++p) reverse_port_[v][p] = g.reverse_port(v, p);
}

void Engine::check_budget(VertexId v, std::uint64_t phase_round) {
    if (!cfg_.enforce_budget) return;
    if (ledgers_[v].live_bits() > budget_bits_) {
        std::string slots;
        for (const auto& s : ledgers_[v].live_slots()) slots += s + " ";
        throw ProtocolFault("memory budget exceeded at vertex " + std::to_string(v) + ", round " +
                            std::to_string(phase_round) + ": " + std::to_string(ledgers_[v].live_bits()) +
                            " > " + std::to_string(budget_bits_) + " bits; live: " + slots);
    }
}

void Engine::deliver_pending() {
    arrival_vertices_.clear();
    // deterministic by (sender, port); targets collected and deduped
    std::sort(pending_.begin(), pending_.end(), [](const PendingSend& a, const PendingSend& b) {
        if (a.from != b.from) return a.from < b.from;
        return a.port < b.port;
    });
    for (auto& ps : pending_) {
        VertexId to = g_->neighbor(ps.from, ps.port);
        PortId rp = reverse_port_[ps.from][ps.port];
        PortBuffer& pb = buffers_[to][rp];
        pb.msg = std::move(ps.msg);
        pb.arrival = global_round_ + 1;
        if (arrivals_[to].empty()) arrival_vertices_.push_back(to);
        arrivals_[to].push_back(rp);
    }
    pending_.clear();
}

PhaseStats Engine::run_phase(const PhaseConfig& pc, const RoundHandler& handler) {
    PhaseStats stats;
    stats.name = pc.name;
    stats.frames_per_macro = pc.frames_per_macro;
    cur_w_ = pc.frames_per_macro;
    cur_stats_ = &stats;
    std::uint64_t cap = pc.macro_round_cap ? pc.macro_round_cap : cfg_.macro_round_cap;

    std::uint64_t phase_start = global_round_;
    std::uint64_t phase_round = 0;
    std::uint64_t last_send_round = 0; // a send in round t is delivered by its end
    std::vector<VertexId> active;
    bool first = true;

    auto congestion_check = [&](VertexId v) {
        if (arrivals_[v].size() < 2) return;
        std::int32_t seen = -1;
        bool multi = false;
        for (PortId p : arrivals_[v]) {
            std::int32_t tag = buffers_[v][p].msg.slot_tag;
            if (tag < 0) continue;
            if (seen >= 0 && tag != seen) multi = true;
            seen = tag;
        }
        if (multi) {
            ++congestion_violations_;
            if (cfg_.fault_on_congestion)
                throw ProtocolFault("congestion fault: vertex " + std::to_string(v) +
                                    " received messages of two slots in round " + std::to_string(phase_round));
        }
    };

    while (true) {
        // decide next macro round with any activity
        std::uint64_t next = global_round_ + 1;
        bool has_deliveries = !pending_.empty();
        bool has_wakes = !wakes_.empty();
        if (!first && !has_deliveries && !has_wakes) {
            // quiescent: fixed phases idle out the rest of the schedule
            if (pc.fixed_macro_rounds) {
                std::uint64_t done = global_round_ - phase_start;
                if (done < pc.fixed_macro_rounds) global_round_ = phase_start + pc.fixed_macro_rounds;
            }
            break;
        }
        if (!first && !has_deliveries && has_wakes) {
            std::uint64_t w = wakes_.begin()->first;
            if (w > next) {
                global_round_ = w; // idle rounds still elapse
                next = w;
            }
        }
        if (first) next = global_round_ + 1;
        phase_round = next - phase_start;
        if (pc.fixed_macro_rounds && phase_round > pc.fixed_macro_rounds) {
            if (has_deliveries || !pending_.empty())
                throw ProtocolFault("phase '" + pc.name + "' has traffic beyond its fixed schedule");
            // wakes beyond schedule are a protocol bug as well
            throw ProtocolFault("phase '" + pc.name + "' has wakes beyond its fixed schedule");
        }
        if (phase_round > cap)
            throw ProtocolFault("round cap exceeded in phase '" + pc.name + "' (non-termination guard)");

        deliver_pending();
        global_round_ = next;

        active.clear();
        if (first && pc.activate_all_at_start) {
            active.resize(g_->vertex_count());
            for (VertexId v = 0; v < g_->vertex_count(); ++v) active[v] = v;
        } else {
            active = arrival_vertices_;
        }
        auto it = wakes_.find(global_round_);
        if (it != wakes_.end()) {
            for (VertexId v : it->second) active.push_back(v);
            wakes_.erase(it);
        }
        std::sort(active.begin(), active.end());
        active.erase(std::unique(active.begin(), active.end()), active.end());

        for (VertexId v : active) {
            congestion_check(v);
            Env env(*this, v, phase_round, arrivals_[v]);
            handler(env);
            check_budget(v, phase_round);
        }
        if (!pending_.empty()) last_send_round = phase_round;
        for (VertexId v : arrival_vertices_) arrivals_[v].clear();
        arrival_vertices_.clear();
        first = false;

        if (pc.fixed_macro_rounds && phase_round == pc.fixed_macro_rounds) {
            if (!pending_.empty())
                throw ProtocolFault("phase '" + pc.name + "' left messages in flight at schedule end");
            if (!wakes_.empty())
                throw ProtocolFault("phase '" + pc.name + "' left wakes pending at schedule end");
            break;
        }
    }

    // a phase ends when its last frames are delivered; trailing rounds that
    // only read already-delivered state cost no time
    stats.macro_rounds = pc.fixed_macro_rounds ? pc.fixed_macro_rounds : last_send_round;
    stats.frame_rounds = stats.macro_rounds * pc.frames_per_macro;
    cur_stats_ = nullptr;
    return stats;
}

std::uint64_t Engine::global_peak_bits() const {
    std::uint64_t peak = 0;
    for (const auto& l : ledgers_) peak = std::max(peak, l.peak_bits());
    return peak;
}

std::vector<std::uint64_t> Engine::peaks_per_vertex() const {
    std::vector<std::uint64_t> out;
    out.reserve(ledgers_.size());
    for (const auto& l : ledgers_) out.push_back(l.peak_bits());
    return out;
}

} // namespace congest
