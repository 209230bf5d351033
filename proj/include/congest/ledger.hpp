#ifndef CONGEST_LEDGER_HPP
#define CONGEST_LEDGER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "congest/common.hpp"

namespace congest {

// Register groups a protocol vertex may hold. Read-only adjacency and port
// buffers are deliberately absent: the model does not charge them.
enum class Reg : std::uint8_t {
    Scratch,       // tests and miscellaneous
    Bfs,           // parent port, depth, child count, d(T)
    BfsTmp,        // transient counters during tree construction
    SubtreeSize,   // routing setup intermediate
    RouteTable,    // Thorup-Zwick table
    SelfLabel,     // own routing label
    LeaderLabel,   // fragment leader's routing label
    Frag,          // fragment id, parent port, child count, flags
    FragTmp,       // per-phase temporaries (candidates, retrace, diameter calc)
    Base,          // base fragment structure
    SlotMeta,      // slot numbers, S, K, subset counts
    CycleOwn,      // own partial result during a cycle
    CycleTmp,      // the one foreign partial being relayed this round
    RootMsg,       // msg_T at the BFS root
    Virt,          // replicated virtual-node state
    SlotGen,       // caches used by slot-set generation
    MstEdges,      // recorded MST/MSF edge ports
    Pwa,           // part id, input, output
    Count_
};

const char* reg_name(Reg r);

// Per-vertex bit accounting. Live bits are checked against the budget at the
// end of every round; the peak additionally sees within-round transients.
class MemoryLedger {
public:
    void charge(Reg slot, std::uint64_t bits);
    void release(Reg slot);
    // charge-or-resize; releasing via set(slot, 0)
    void set(Reg slot, std::uint64_t bits);
    std::uint64_t get(Reg slot) const { return bits_[static_cast<std::size_t>(slot)]; }

    std::uint64_t live_bits() const { return live_; }
    std::uint64_t peak_bits() const { return peak_; }
    std::uint64_t slot_peak(Reg slot) const { return slot_peak_[static_cast<std::size_t>(slot)]; }

    // names of slots still charged (leak reporting)
    std::vector<std::string> live_slots() const;

private:
    std::uint64_t bits_[static_cast<std::size_t>(Reg::Count_)] = {};
    std::uint64_t slot_peak_[static_cast<std::size_t>(Reg::Count_)] = {};
    std::uint64_t live_ = 0;
    std::uint64_t peak_ = 0;
};

} // namespace congest

#endif
