#pragma once

#include <cstdint>
#include <random>

namespace shipnet {

// Seeded random stream with a fixed draw discipline. The raw engine is
// std::mt19937_64 (output sequence fixed by the standard); conversions to
// real numbers are done here rather than through std distributions, whose
// algorithms differ between standard libraries.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 bits of resolution.
    double next_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [lo, hi].
    std::int64_t next_int(std::int64_t lo, std::int64_t hi) {
        const auto span = static_cast<double>(hi - lo + 1);
        auto k = static_cast<std::int64_t>(next_unit() * span);
        if (k > hi - lo) k = hi - lo;
        return lo + k;
    }

private:
    std::mt19937_64 engine_;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Independent child seed for stream `k` of a run seeded with `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k) {
    return splitmix64(splitmix64(seed) ^ (k * 0xd1b54a32d192ed03ull));
}

}  // namespace shipnet
