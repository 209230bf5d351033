#ifndef CONGEST_ENGINE_HPP
#define CONGEST_ENGINE_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "congest/common.hpp"
#include "congest/graph.hpp"
#include "congest/ledger.hpp"
#include "congest/message.hpp"
#include "congest/metrics.hpp"

namespace congest {

struct EngineConfig {
    std::uint32_t word_constant = 4;   // c_w: word_bits = c_w * ceil(log2 n)
    std::uint32_t memory_constant = 64; // c_m: budget = c_m * ceil(log2 n)^2
    std::uint64_t macro_round_cap = 1u << 24;
    bool fault_on_congestion = true;
    bool enforce_budget = true;

    std::uint32_t word_bits_for(std::uint32_t n) const {
        return std::max<std::uint32_t>(word_constant * bit_width_for(std::max(n, 2u)), 24);
    }
    std::uint64_t budget_bits_for(std::uint32_t n) const {
        std::uint64_t b = std::max<std::uint32_t>(ceil_log2(std::max(n, 2u)), 4);
        return memory_constant * b * b;
    }
};

struct PhaseConfig {
    std::string name;
    std::uint32_t frames_per_macro = 1; // W
    std::uint64_t fixed_macro_rounds = 0; // 0: run to quiescence
    bool activate_all_at_start = true;
    std::uint64_t macro_round_cap = 0; // 0: engine default
};

struct PortBuffer {
    Msg msg;
    std::uint64_t arrival = 0; // global macro-round; 0 = empty
};

class Engine;

// Per-round view a vertex handler gets. Handlers may only touch their own
// context; all cross-vertex influence goes through send().
class Env {
public:
    Env(Engine& eng, VertexId v, std::uint64_t phase_round, const std::vector<PortId>& arrivals)
        : eng_(eng), v_(v), round_(phase_round), arrivals_(arrivals) {}

    VertexId id() const { return v_; }
    std::uint64_t round() const { return round_; } // 1-based within the phase
    std::uint32_t degree() const;
    VertexId neighbor(PortId p) const;
    WeightRank rank_at(PortId p) const;
    std::uint32_t edge_at(PortId p) const;

    const std::vector<PortId>& arrivals() const { return arrivals_; }
    const Msg* arrived(PortId p) const;  // message delivered exactly this round
    const Msg* buffered(PortId p) const; // whatever the buffer holds (any age)
    std::uint64_t buffer_age(PortId p) const; // phase rounds since arrival; 0 = this round

    void send(PortId p, Msg m);
    void wake_at(std::uint64_t phase_round);
    void wake_next() { wake_at(round_ + 1); }

    MemoryLedger& ledger();

private:
    Engine& eng_;
    VertexId v_;
    std::uint64_t round_;
    const std::vector<PortId>& arrivals_;
};

using RoundHandler = std::function<void(Env&)>;

// Deterministic synchronous executor. A frame sent in macro-round t is
// readable from t+1. Port buffers keep the last message per port until
// overwritten ("unopened" requests persist).
class Engine {
public:
    Engine(const WeightedGraph& g, EngineConfig cfg);

    PhaseStats run_phase(const PhaseConfig& pc, const RoundHandler& handler);

    const WeightedGraph& graph() const { return *g_; }
    const EngineConfig& config() const { return cfg_; }
    std::uint32_t word_bits() const { return word_bits_; }
    std::uint64_t budget_bits() const { return budget_bits_; }

    MemoryLedger& ledger(VertexId v) { return ledgers_[v]; }
    const MemoryLedger& ledger(VertexId v) const { return ledgers_[v]; }
    const PortBuffer& buffer(VertexId v, PortId p) const { return buffers_[v][p]; }

    std::uint64_t congestion_violations() const { return congestion_violations_; }
    std::uint64_t global_peak_bits() const;
    std::vector<std::uint64_t> peaks_per_vertex() const;

private:
    friend class Env;
    struct PendingSend {
        VertexId from;
        PortId port;
        Msg msg;
    };

    void deliver_pending();
    void check_budget(VertexId v, std::uint64_t phase_round);
    std::size_t port_key(VertexId v, PortId p) const { return port_offset_[v] + p; }

    const WeightedGraph* g_;
    EngineConfig cfg_;
    std::uint32_t word_bits_;
    std::uint64_t budget_bits_;

    std::vector<MemoryLedger> ledgers_;
    std::vector<std::vector<PortBuffer>> buffers_;
    std::vector<std::vector<PortId>> reverse_port_;

    std::uint64_t global_round_ = 0; // macro rounds across all phases
    std::vector<PendingSend> pending_;
    std::vector<std::vector<PortId>> arrivals_;      // per vertex, this round
    std::vector<VertexId> arrival_vertices_;         // vertices with arrivals
    std::map<std::uint64_t, std::vector<VertexId>> wakes_; // global round -> vertices
    std::vector<std::uint64_t> sent_on_port_round_;  // dedup guard, lazy per round
    std::vector<std::size_t> port_offset_;

    // current phase accounting
    std::uint32_t cur_w_ = 1;
    PhaseStats* cur_stats_ = nullptr;
    std::uint64_t congestion_violations_ = 0;
};

} // namespace congest

#endif
