#include "congest/checks.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

namespace congest {

namespace {

struct Dsu {
    std::vector<std::uint32_t> parent;
    explicit Dsu(std::uint32_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::uint32_t find(std::uint32_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[a] = b;
        return true;
    }
};

std::set<std::uint32_t> recorded_edges(const Sim& sim) {
    std::set<std::uint32_t> out;
    for (VertexId v = 0; v < sim.glob.n; ++v)
        for (PortId p : sim.st[v].mst_ports) out.insert(sim.g.edge_at(v, p));
    return out;
}

} // namespace

void check_fragment_forest(const Sim& sim, bool strict) {
    Dsu dsu(sim.glob.n);
    std::set<std::uint32_t> edges = recorded_edges(sim);
    for (auto e : edges) {
        const auto& er = sim.g.edge(e);
        if (strict && sim.st[er.u].frag_id != sim.st[er.v].frag_id)
            throw ProtocolFault("recorded edge crosses fragments");
        if (!dsu.unite(er.u, er.v)) throw ProtocolFault("recorded edges contain a cycle");
    }
    // recorded edges connect each fragment completely
    std::map<std::uint64_t, std::uint32_t> rep;
    for (VertexId v = 0; v < sim.glob.n; ++v) {
        auto it = rep.find(sim.st[v].frag_id);
        if (it == rep.end()) {
            rep[sim.st[v].frag_id] = dsu.find(v);
        } else if (it->second != dsu.find(v)) {
            throw ProtocolFault("fragment is not spanned by its recorded edges");
        }
    }
}

void check_replication(const Sim& sim) {
    struct Snap {
        std::uint64_t frag, vparent, partner, subtree_parent, color;
        bool matched, root, sroot, term;
        std::uint32_t p_slot;
    };
    std::map<std::uint64_t, Snap> per_frag;
    for (VertexId v = 0; v < sim.glob.n; ++v) {
        const SolVertex& s = sim.st[v];
        if (s.small_component) continue;
        Snap snap{s.frag_id, s.vparent, s.partner, s.subtree_parent, s.color,
                  s.matched, s.is_virtual_root, s.is_subtree_root, s.terminated, s.p_slot};
        auto [it, fresh] = per_frag.emplace(s.frag_id, snap);
        if (fresh) continue;
        const Snap& o = it->second;
        if (o.vparent != snap.vparent || o.partner != snap.partner ||
            o.subtree_parent != snap.subtree_parent || o.color != snap.color ||
            o.matched != snap.matched || o.root != snap.root || o.sroot != snap.sroot ||
            o.term != snap.term || o.p_slot != snap.p_slot)
            throw ProtocolFault("virtual-node state diverges inside fragment " +
                                std::to_string(s.frag_id));
    }
}

void check_growth(const Sim& sim, std::uint32_t phase_index) {
    std::map<std::uint64_t, std::uint32_t> size;
    for (VertexId v = 0; v < sim.glob.n; ++v) ++size[sim.st[v].frag_id];
    for (VertexId v = 0; v < sim.glob.n; ++v) {
        const SolVertex& s = sim.st[v];
        if (s.terminated) continue;
        std::uint32_t sz = size[s.frag_id];
        std::uint64_t want = std::min<std::uint64_t>(1ull << phase_index, sim.glob.n);
        if (sz < want && sz < sim.glob.k_threshold)
            throw ProtocolFault("fragment of size " + std::to_string(sz) +
                                " violates the growth guarantee after phase " +
                                std::to_string(phase_index));
    }
}

void check_base_bounds(const Sim& sim) {
    std::uint32_t n = sim.glob.n;
    std::uint32_t d_t = std::max(sim.glob.d_t, 1u);
    double bound_k = 8.0 * std::min<double>(static_cast<double>(n) / d_t, std::sqrt(double(n)));
    if (sim.glob.k_b > std::max(bound_k, 1.0))
        throw ProtocolFault("base fragment count " + std::to_string(sim.glob.k_b) +
                            " exceeds 8*min(n/d(T), sqrt n)");
    double bound_d = 8.0 * std::max<double>(d_t, std::sqrt(double(n)));
    if (sim.glob.d_b > bound_d)
        throw ProtocolFault("base tree depth " + std::to_string(sim.glob.d_b) +
                            " exceeds 8*max(d(T), sqrt n)");
}

void check_matching(const Sim& sim) {
    // per-fragment view from any member vertex (replication checked separately)
    std::map<std::uint64_t, const SolVertex*> frag;
    for (VertexId v = 0; v < sim.glob.n; ++v) {
        const SolVertex& s = sim.st[v];
        if (s.small_component || s.terminated) continue;
        frag.emplace(s.frag_id, &s);
    }
    for (auto& [id, s] : frag) {
        if (s->vparent == kNoValue) continue;
        auto it = frag.find(s->vparent);
        if (it == frag.end()) throw ProtocolFault("virtual parent fragment is missing");
        if (!s->matched && !it->second->matched)
            throw ProtocolFault("two adjacent unmatched fragments (matching not maximal)");
    }
    // subtrees: size >= 2, depth <= 3
    std::map<std::uint64_t, std::uint32_t> members;
    for (auto& [id, s] : frag) {
        std::uint64_t root = id;
        std::uint32_t hops = 0;
        const SolVertex* cur = s;
        while (cur->subtree_parent != kNoValue) {
            root = cur->subtree_parent;
            cur = frag.at(cur->subtree_parent);
            if (++hops > 3) throw ProtocolFault("virtual subtree deeper than 3");
        }
        ++members[root];
    }
    for (auto& [root, cnt] : members)
        if (cnt < 2) throw ProtocolFault("a fragment remained in a singleton subtree");
}

void check_mwoe_truth(const Sim& sim) {
    // centralized per-fragment minimum over admissible cross edges
    std::map<std::uint64_t, WeightRank> want;
    for (std::uint32_t e = 0; e < sim.glob.m; ++e) {
        const auto& er = sim.g.edge(e);
        const SolVertex& su = sim.st[er.u];
        const SolVertex& sv = sim.st[er.v];
        if (su.frag_id == sv.frag_id) continue;
        if (sim.mask && !sim.mask->in_h(e)) continue;
        if (sim.cfg.mode == Mode::Pwa && su.part_id != sv.part_id) continue;
        for (auto fid : {su.frag_id, sv.frag_id}) {
            auto it = want.find(fid);
            if (it == want.end() || er.rank < it->second) want[fid] = er.rank;
        }
    }
    for (VertexId v = 0; v < sim.glob.n; ++v) {
        const SolVertex& s = sim.st[v];
        if (!s.is_vadj) continue;
        auto it = want.find(s.frag_id);
        if (it == want.end() || it->second != s.mwoe_rank)
            throw ProtocolFault("recorded MWOE is not the fragment minimum");
    }
}

void check_edge_budget(const Sim& sim) {
    std::uint64_t cap = ceil_log2(std::max(sim.glob.n, 2u)) + sim.metrics.phase1_count + 1;
    for (VertexId v = 0; v < sim.glob.n; ++v)
        if (sim.st[v].mst_ports.size() > cap)
            throw ProtocolFault("vertex stores more recorded edges than the budget");
}

} // namespace congest
