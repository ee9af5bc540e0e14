#pragma once

#include <array>
#include <cstdint>

// Deterministic RNG stack shared by every simulation path.
//
// Generator: xoshiro256++ 1.0, state seeded from a splitmix64 sequence.
// Stream derivation: derive_seed(master, id) = mix64(master + id * GOLDEN),
// i.e. the id-th output of a splitmix64 sequence whose initial state is
// `master`. mix64 is a bijection on 64-bit words and id -> id * GOLDEN is a
// bijection too (GOLDEN is odd), so distinct stream ids always yield distinct
// seeds for a fixed master. Reference vectors live in docs/rng.md and are
// cross-checked from an independent python implementation in the smoke tests.

namespace herdlab::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer (Stafford/Vigna mix constants).
constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_id) {
    return mix64(master + stream_id * kGolden);
}

class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

    constexpr std::uint64_t next() {
        state_ += kGolden;
        return mix64(state_);
    }

private:
    std::uint64_t state_;
};

class Xoshiro256pp {
public:
    explicit constexpr Xoshiro256pp(std::uint64_t seed) : s_{} {
        SplitMix64 sm(seed);
        for (auto& w : s_) w = sm.next();
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = kGolden;
    }

    constexpr std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1), 53 significant bits.
    constexpr double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> s_;
};

// Stream-id layout (documented contract, see README):
//   plain ids 0..2^56-1        per-run streams (urn run r, paired world r)
//   kAppealStream              market item appeals for a world set
//   world_stream(cond, w)      one market world
// Within a world, event e >= 1 uses derive_seed(world_seed, e) and stream 0
// seeds the fixed display shuffle.
inline constexpr std::uint64_t kAppealStream = 1ULL << 56;

constexpr std::uint64_t world_stream(std::uint64_t condition_index, std::uint64_t world_index) {
    return (2ULL << 56) | (condition_index << 32) | world_index;
}

} // namespace herdlab::rng
