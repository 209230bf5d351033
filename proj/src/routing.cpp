#include "congest/routing.hpp"

namespace congest {

RouteDecision route_next_hop(const RoutingTable& table, const RoutingLabel& header) {
    RouteDecision out;
    if (header.dfs_number == table.dfs_number) {
        out.deliver = true;
        return out;
    }
    if (header.dfs_number < table.interval_lo || header.dfs_number >= table.interval_hi) {
        // destination outside our subtree: ascend
        if (table.parent_port == kNoPort) throw ProtocolFault("malformed header: destination outside tree");
        out.forward_port = table.parent_port;
        return out;
    }
    // destination strictly below us: a light-edge entry at our depth, else heavy child
    for (const auto& e : header.light_edges) {
        if (e.depth == table.depth) {
            out.forward_port = e.port;
            return out;
        }
    }
    if (table.heavy_child_port == kNoPort)
        throw ProtocolFault("malformed header: no applicable forwarding rule");
    out.forward_port = table.heavy_child_port;
    return out;
}

void LabelCodec::encode(const RoutingLabel& l, Msg& m) const {
    m.ext.push_back(l.dfs_number);
    m.ext.push_back(static_cast<std::uint32_t>(l.light_edges.size()));
    for (const auto& e : l.light_edges) {
        m.ext.push_back(e.depth);
        m.ext.push_back(e.port);
    }
    m.width_bits += label_bits(l);
}

RoutingLabel LabelCodec::decode(const Msg& m, std::size_t ext_offset) const {
    RoutingLabel l;
    l.dfs_number = m.ext.at(ext_offset);
    std::uint32_t len = m.ext.at(ext_offset + 1);
    l.light_edges.reserve(len);
    for (std::uint32_t i = 0; i < len; ++i)
        l.light_edges.push_back(LabelEntry{m.ext.at(ext_offset + 2 + 2 * i), m.ext.at(ext_offset + 3 + 2 * i)});
    return l;
}

std::uint32_t table_bits(const RoutingTable&, std::uint32_t n) {
    std::uint32_t b = std::max<std::uint32_t>(bit_width_for(n), 1);
    // dfs number + interval lo/hi + heavy port + parent port + depth
    return 6 * b;
}

} // namespace congest
