#pragma once

#include <cstdint>
#include <cmath>

namespace mdmc {

// Splittable-seed scheme: every stream is identified by a (seed, tag) pair and
// derived with SplitMix64, so replica i of an experiment always draws from
// Rng(split(seed, i)) regardless of thread scheduling.  There is no global RNG.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t split_seed(uint64_t seed, uint64_t tag) {
    return splitmix64(seed ^ splitmix64(tag));
}

// xoshiro256** core. Self-contained so that streams are bit-identical across
// platforms (std::uniform_* distributions are implementation-defined).
class Rng {
public:
    explicit Rng(uint64_t seed = 0) {
        uint64_t x = seed;
        for (auto& w : s_) w = x = splitmix64(x);
    }

    uint64_t next_u64() {
        auto rotl = [](uint64_t v, int k) { return (v << k) | (v >> (64 - k)); };
        uint64_t result = rotl(s_[1] * 5, 7) * 9;
        uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in {0, ..., n-1} by rejection (unbiased).
    uint64_t below(uint64_t n) {
        if (n == 0) return 0;
        uint64_t threshold = (~n + 1) % n;  // 2^64 mod n
        for (;;) {
            uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    bool bernoulli(double p) { return uniform() < p; }

private:
    uint64_t s_[4];
};

}  // namespace mdmc
