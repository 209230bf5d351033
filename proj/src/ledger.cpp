#include "congest/ledger.hpp"

namespace congest {

const char* reg_name(Reg r) {
    switch (r) {
    case Reg::Scratch: return "scratch";
    case Reg::Bfs: return "bfs";
    case Reg::BfsTmp: return "bfs_tmp";
    case Reg::SubtreeSize: return "subtree_size";
    case Reg::RouteTable: return "route_table";
    case Reg::SelfLabel: return "self_label";
    case Reg::LeaderLabel: return "leader_label";
    case Reg::Frag: return "frag";
    case Reg::FragTmp: return "frag_tmp";
    case Reg::Base: return "base";
    case Reg::SlotMeta: return "slot_meta";
    case Reg::CycleOwn: return "cycle_own";
    case Reg::CycleTmp: return "cycle_tmp";
    case Reg::RootMsg: return "root_msg";
    case Reg::Virt: return "virt";
    case Reg::SlotGen: return "slot_gen";
    case Reg::MstEdges: return "mst_edges";
    case Reg::Pwa: return "pwa";
    case Reg::Count_: break;
    }
    return "?";
}

void MemoryLedger::charge(Reg slot, std::uint64_t bits) {
    auto i = static_cast<std::size_t>(slot);
    if (bits_[i] != 0)
        throw ProtocolFault(std::string("ledger: slot already charged: ") + reg_name(slot));
    bits_[i] = bits;
    if (bits > slot_peak_[i]) slot_peak_[i] = bits;
    live_ += bits;
    if (live_ > peak_) peak_ = live_;
}

void MemoryLedger::release(Reg slot) {
    auto i = static_cast<std::size_t>(slot);
    if (bits_[i] == 0)
        throw ProtocolFault(std::string("ledger: release of unknown slot: ") + reg_name(slot));
    live_ -= bits_[i];
    bits_[i] = 0;
}

void MemoryLedger::set(Reg slot, std::uint64_t bits) {
    auto i = static_cast<std::size_t>(slot);
    live_ = live_ - bits_[i] + bits;
    bits_[i] = bits;
    if (bits > slot_peak_[i]) slot_peak_[i] = bits;
    if (live_ > peak_) peak_ = live_;
}

std::vector<std::string> MemoryLedger::live_slots() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < static_cast<std::size_t>(Reg::Count_); ++i)
        if (bits_[i] != 0) out.push_back(reg_name(static_cast<Reg>(i)));
    return out;
}

} // namespace congest
