#ifndef CONGEST_ROUTING_HPP
#define CONGEST_ROUTING_HPP

#include <cstdint>
#include <vector>

#include "congest/common.hpp"
#include "congest/message.hpp"

namespace congest {

// One label entry: at tree depth `depth`, descend through `port`.
// Entries exist only for light edges (child subtree < half the parent's).
struct LabelEntry {
    std::uint32_t depth;
    std::uint32_t port;
};

// Tree-routing label of a destination vertex. Headers are identical to the
// label, so this is also the full routing header.
struct RoutingLabel {
    std::uint32_t dfs_number = 0;           // 1-based DFS entry number
    std::vector<LabelEntry> light_edges;    // ordered by depth, <= ceil(log2 n) entries

    bool operator==(const RoutingLabel& o) const {
        if (dfs_number != o.dfs_number || light_edges.size() != o.light_edges.size()) return false;
        for (std::size_t i = 0; i < light_edges.size(); ++i)
            if (light_edges[i].depth != o.light_edges[i].depth || light_edges[i].port != o.light_edges[i].port)
                return false;
        return true;
    }
};

// Per-vertex routing table: own DFS number and interval, the heavy child
// port (at most one child can hold at least half the subtree), parent port.
struct RoutingTable {
    std::uint32_t dfs_number = 0;
    std::uint32_t interval_lo = 0; // own subtree covers [lo, hi)
    std::uint32_t interval_hi = 0;
    PortId heavy_child_port = kNoPort;
    PortId parent_port = kNoPort;
    std::uint32_t depth = 0;
};

struct RouteDecision {
    bool deliver = false;
    PortId forward_port = kNoPort;
};

// Pure forwarding rule: deliver on DFS-number match; descend via the label
// entry at our depth if present, else via the heavy child; ascend otherwise.
RouteDecision route_next_hop(const RoutingTable& table, const RoutingLabel& header);

// ---- wire encoding ----

// bit widths used on the wire; b = ceil(log2(n+1)), bd = bits for depths
struct LabelCodec {
    std::uint32_t id_bits;
    std::uint32_t depth_bits;
    std::uint32_t len_bits = 6;

    LabelCodec(std::uint32_t n, std::uint32_t d_t)
        : id_bits(std::max<std::uint32_t>(bit_width_for(n), 1)),
          depth_bits(std::max<std::uint32_t>(bit_width_for(d_t + 1), 1)) {}

    std::uint32_t label_bits(const RoutingLabel& l) const {
        return id_bits + len_bits +
               static_cast<std::uint32_t>(l.light_edges.size()) * (depth_bits + id_bits);
    }
    // worst case, from the halving bound on light edges
    std::uint32_t label_bits_cap(std::uint32_t n) const {
        return id_bits + len_bits + ceil_log2(std::max(n, 2u)) * (depth_bits + id_bits);
    }

    void encode(const RoutingLabel& l, Msg& m) const; // appends to m.ext, adds to width
    RoutingLabel decode(const Msg& m, std::size_t ext_offset = 0) const;
};

std::uint32_t table_bits(const RoutingTable& t, std::uint32_t n);

} // namespace congest

#endif
