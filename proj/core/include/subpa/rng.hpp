#pragma once

#include <cstdint>

namespace subpa {

// Self-contained xoshiro256++ generator seeded through splitmix64, so that
// streams and sampling are identical across platforms and standard
// libraries.  Replica streams are derived by hashing (seed, stream index);
// distinct indices give statistically independent streams.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : state_) word = splitmix64(x);
    }

    static Rng stream(std::uint64_t master_seed, std::uint64_t stream_index) {
        std::uint64_t x = master_seed ^ (0x9E3779B97F4A7C15ULL * (stream_index + 1));
        return Rng(splitmix64(x));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result =
            rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53 random bits.
    double unit() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n) without modulo bias (Lemire rejection).
    std::uint64_t below(std::uint64_t n) {
        for (;;) {
            const std::uint64_t x = next_u64();
            const unsigned __int128 m = (unsigned __int128)x * n;
            const std::uint64_t lo = (std::uint64_t)m;
            if (lo >= n || lo >= (0ULL - n) % n) return (std::uint64_t)(m >> 64);
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t v, int k) {
        return (v << k) | (v >> (64 - k));
    }

    static std::uint64_t splitmix64(std::uint64_t& x) {
        x += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_[4];
};

}  // namespace subpa
