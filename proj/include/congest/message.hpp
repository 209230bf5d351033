#ifndef CONGEST_MESSAGE_HPP
#define CONGEST_MESSAGE_HPP

#include <cstdint>
#include <vector>

#include "congest/common.hpp"

namespace congest {

enum class MsgKind : std::uint8_t {
    Generic,
    // BFS construction
    BfsJoin,
    BfsAck,
    DepthUp,
    DepthDown,
    // routing setup
    SizeUp,
    RtAssign,
    // generic tree machinery
    TreePin,   // request pin: "I know this tree edge"
    TreeUp,    // convergecast payload (token in a)
    TreeDown,  // broadcast payload (token in a)
    // fragment phases
    Probe,
    CandUp,
    FragDown,  // retrace notify or termination flood
    MergeReq,
    ReqNotice,
    NewId,
    ChildPing,
    // setup slot assignment over T
    AllocUp,
    AllocDown,
    SMax,
    // communication cycles
    CycUp,     // extrinsic upcast: ptype in a, values b..c, label in ext
    CycDown,   // routed reply: values, label in ext
    // phase 2 cross-fragment rounds
    MwoeAnnounce,
    VPing,
    VReply,
    SgRequest, // slot generation 2(a)/4(d) request over an MWOE
    SgReply,   // slot generation 4(d) reply
    CacheOffer // slot generation 4(c) re-offer inside a base fragment
};

// One logical message. The engine splits it into word-sized frames for
// accounting; the receiving port buffer exposes it reassembled.
struct Msg {
    MsgKind kind = MsgKind::Generic;
    std::uint64_t a = 0, b = 0, c = 0, d = 0;
    std::vector<std::uint32_t> ext; // label entries and similar variable parts
    std::uint32_t width_bits = 0;   // set by composers; must be > 0 to send
    std::int32_t slot_tag = -1;     // checker metadata, not part of the payload
};

constexpr std::uint32_t kTagBits = 6; // message kind discriminator

inline Msg make_msg(MsgKind k, std::uint32_t width_bits, std::uint64_t a = 0, std::uint64_t b = 0,
                    std::uint64_t c = 0, std::uint64_t d = 0) {
    Msg m;
    m.kind = k;
    m.a = a;
    m.b = b;
    m.c = c;
    m.d = d;
    m.width_bits = width_bits;
    return m;
}

} // namespace congest

#endif
