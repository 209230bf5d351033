#ifndef CONGEST_COMMON_HPP
#define CONGEST_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace congest {

using VertexId = std::uint32_t;
using PortId = std::uint32_t;
using WeightRank = std::uint64_t; // protocol-side weight: rank in [1..m], unique

constexpr VertexId kNoVertex = std::numeric_limits<VertexId>::max();
constexpr PortId kNoPort = std::numeric_limits<PortId>::max();
constexpr std::uint64_t kNoValue = std::numeric_limits<std::uint64_t>::max();

// Thrown on malformed inputs and configuration errors.
struct InputError : std::runtime_error {
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a protocol violates a model rule (memory budget, congestion,
// malformed header, round cap).
struct ProtocolFault : std::runtime_error {
    explicit ProtocolFault(const std::string& what) : std::runtime_error(what) {}
};

inline std::uint32_t bit_width_for(std::uint64_t max_value) {
    std::uint32_t bits = 1;
    while ((max_value >> bits) != 0) ++bits;
    return bits;
}

// ceil(log2(x)) for x >= 1
inline std::uint32_t ceil_log2(std::uint64_t x) {
    std::uint32_t b = 0;
    std::uint64_t v = 1;
    while (v < x) {
        v <<= 1;
        ++b;
    }
    return b;
}

inline std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

inline std::uint64_t isqrt_floor(std::uint64_t x) {
    std::uint64_t r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(x)));
    while (r * r > x) --r;
    while ((r + 1) * (r + 1) <= x) ++r;
    return r;
}

// Deterministic, platform-independent PRNG (splitmix64).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed + 0x9e3779b97f4a7c15ULL) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, bound)
    std::uint64_t below(std::uint64_t bound) {
        // modulo bias is irrelevant for simulation inputs
        return next() % bound;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

} // namespace congest

#endif
