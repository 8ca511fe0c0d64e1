#pragma once
#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace seqpv {

// SplitMix64, used for seeding and for deriving per-replication seeds.
struct SplitMix64 {
    std::uint64_t state;
    explicit SplitMix64(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
};

/// xoshiro256** (Blackman/Vigna). Chosen because its full state is four
/// 64-bit words, so generator snapshots serialize to a short hex string and
/// resume is portable across builds and platforms.
class Xoshiro256ss {
  public:
    static constexpr const char* algorithm_name = "xoshiro256**";

    Xoshiro256ss() : Xoshiro256ss(0xDEADBEEFCAFEBABEULL) {}
    explicit Xoshiro256ss(std::uint64_t seed) {
        SplitMix64 sm(seed);
        for (auto& w : s_) w = sm.next();
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;   // all-zero state is invalid
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[1] * 5ULL, 7) * 9ULL;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in [0,1) with 53-bit precision.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound). Unbiased via rejection.
    std::uint64_t uniform_below(std::uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("uniform_below: bound must be positive");
        const std::uint64_t m = -bound % bound;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x < m);
        return x % bound;
    }

    std::string state_hex() const {
        static const char* digits = "0123456789abcdef";
        std::string out;
        out.reserve(64);
        for (auto w : s_)
            for (int shift = 60; shift >= 0; shift -= 4) out.push_back(digits[(w >> shift) & 0xF]);
        return out;
    }

    static Xoshiro256ss from_state_hex(const std::string& hex) {
        if (hex.size() != 64) throw std::invalid_argument("rng state: expected 64 hex chars");
        Xoshiro256ss rng;
        for (int i = 0; i < 4; ++i) {
            std::uint64_t w = 0;
            for (int j = 0; j < 16; ++j) {
                const char c = hex[static_cast<std::size_t>(i * 16 + j)];
                std::uint64_t d;
                if (c >= '0' && c <= '9') d = static_cast<std::uint64_t>(c - '0');
                else if (c >= 'a' && c <= 'f') d = static_cast<std::uint64_t>(c - 'a' + 10);
                else if (c >= 'A' && c <= 'F') d = static_cast<std::uint64_t>(c - 'A' + 10);
                else throw std::invalid_argument("rng state: invalid hex digit");
                w = (w << 4) | d;
            }
            rng.s_[static_cast<std::size_t>(i)] = w;
        }
        if ((rng.s_[0] | rng.s_[1] | rng.s_[2] | rng.s_[3]) == 0)
            throw std::invalid_argument("rng state: all-zero state");
        return rng;
    }

    bool operator==(const Xoshiro256ss& o) const { return s_ == o.s_; }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::array<std::uint64_t, 4> s_{};
};

/// Seed for replication `index` of a study seeded by `master_seed`. Stable
/// under any partition of replications across workers.
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
    SplitMix64 sm(master_seed ^ (0x9E3779B97F4A7C15ULL * (index + 1)));
    sm.next();
    return sm.next();
}

}  // namespace seqpv
