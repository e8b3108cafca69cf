#pragma once

// Standalone MT19937-64 written from the published reference algorithm
// (Matsumoto & Nishimura, 64-bit variant). Deliberately shares nothing with
// the library so seeded-stream replays are independent.

#include <array>
#include <cstdint>

namespace oracle {

class Mt64 {
public:
    explicit Mt64(std::uint64_t seed) {
        mt_[0] = seed;
        for (mti_ = 1; mti_ < kN; ++mti_)
            mt_[mti_] = 6364136223846793005ULL * (mt_[mti_ - 1] ^ (mt_[mti_ - 1] >> 62)) + mti_;
    }

    std::uint64_t next() {
        static constexpr std::uint64_t mag01[2] = {0ULL, 0xB5026F5AA96619E9ULL};
        if (mti_ >= kN) {
            int i = 0;
            for (; i < kN - kM; ++i) {
                const std::uint64_t x = (mt_[i] & kUpper) | (mt_[i + 1] & kLower);
                mt_[i] = mt_[i + kM] ^ (x >> 1) ^ mag01[x & 1ULL];
            }
            for (; i < kN - 1; ++i) {
                const std::uint64_t x = (mt_[i] & kUpper) | (mt_[i + 1] & kLower);
                mt_[i] = mt_[i + (kM - kN)] ^ (x >> 1) ^ mag01[x & 1ULL];
            }
            const std::uint64_t x = (mt_[kN - 1] & kUpper) | (mt_[0] & kLower);
            mt_[kN - 1] = mt_[kM - 1] ^ (x >> 1) ^ mag01[x & 1ULL];
            mti_ = 0;
        }
        std::uint64_t x = mt_[mti_++];
        x ^= (x >> 29) & 0x5555555555555555ULL;
        x ^= (x << 17) & 0x71D67FFFEDA60000ULL;
        x ^= (x << 37) & 0xFFF7EEE000000000ULL;
        x ^= (x >> 43);
        return x;
    }

    // 53-bit mantissa in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    static constexpr int kN = 312, kM = 156;
    static constexpr std::uint64_t kUpper = 0xFFFFFFFF80000000ULL, kLower = 0x7FFFFFFFULL;
    std::array<std::uint64_t, kN> mt_{};
    int mti_ = 0;
};

// Replays one impaired leg: a loss draw per packet, a jitter draw only for
// admitted packets when the half-width is non-zero. Returns the drop count.
inline std::size_t replay_drops(std::uint64_t seed, double p, std::int64_t jitter, std::size_t packets) {
    Mt64 g(seed);
    std::size_t drops = 0;
    for (std::size_t i = 0; i < packets; ++i) {
        if (g.unit() < p) {
            ++drops;
            continue;
        }
        if (jitter > 0) g.next();
    }
    return drops;
}

}  // namespace oracle
