#pragma once

#include <cstdint>

namespace isinglab {

// Purpose tags keep the unit-variable streams of different mechanisms
// disjoint, so e.g. the exposure coupling and CFTP can both be driven from
// one seed without sharing variables.
enum class Purpose : std::uint64_t {
    stream = 1,
    site_pick = 2,
    site_update = 3,
    bond_sweep = 4,
    exposure_edge = 5,
    cluster_spin = 6,
    cftp_update = 7,
    block_update = 8,
    es_bond = 9,
};

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
} // namespace detail

// Counter-based source of uniform unit variables. A variable is addressed by
// (purpose, index, epoch) and is a pure function of (seed, address); this is
// what lets CFTP re-read the randomness of earlier epochs and lets the grand
// coupling feed identical U_e to its three chains.
class RandomSource {
  public:
    explicit RandomSource(std::uint64_t seed) : seed_(detail::mix64(seed ^ 0x5bf0'3635'dcb2'9a1fULL)) {}

    std::uint64_t bits(Purpose p, std::uint64_t index, std::uint64_t epoch = 0) const {
        std::uint64_t h = seed_;
        h = detail::mix64(h ^ (static_cast<std::uint64_t>(p) * 0xd6e8feb86659fd93ULL));
        h = detail::mix64(h ^ index);
        h = detail::mix64(h ^ (epoch * 0xa0761d6478bd642fULL));
        return h;
    }

    // Uniform on [0,1).
    double u(Purpose p, std::uint64_t index, std::uint64_t epoch = 0) const {
        return static_cast<double>(bits(p, index, epoch) >> 11) * 0x1.0p-53;
    }

    // Sequential stream for call sites that only need i.i.d. uniforms.
    double next() { return u(Purpose::stream, counter_++); }
    std::uint64_t next_bits() { return bits(Purpose::stream, counter_++); }
    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        // 64-bit multiply-shift; bias is < 2^-53 for the n used here.
        return static_cast<std::uint64_t>(next() * static_cast<double>(n));
    }

    // Independent stream for a parallel chain or replica.
    RandomSource fork(std::uint64_t stream_id) const {
        RandomSource r(0);
        r.seed_ = detail::mix64(seed_ ^ detail::mix64(stream_id * 0xe703'7ed1'a0b4'28dbULL));
        return r;
    }

    std::uint64_t raw_seed() const { return seed_; }

  private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

} // namespace isinglab
