#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace qsdlab {

/// Philox4x64-10 counter-based generator (Salmon et al., matching the
/// Random123 reference and numpy.random.Philox). A stream is keyed by
/// (seed, stream id); draws consume successive counter blocks, so any
/// particle's randomness is independent of scheduling and thread count.
struct Philox4x64 {
    static constexpr uint64_t M0 = 0xD2E7470EE14C6C93ULL;
    static constexpr uint64_t M1 = 0xCA5A826395121157ULL;
    static constexpr uint64_t W0 = 0x9E3779B97F4A7C15ULL;
    static constexpr uint64_t W1 = 0xBB67AE8584CAA73BULL;

    static std::array<uint64_t, 4> block(std::array<uint64_t, 4> ctr, std::array<uint64_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            ctr = single_round(ctr, key);
            key[0] += W0;
            key[1] += W1;
        }
        return ctr;
    }

private:
    static void mulhilo(uint64_t a, uint64_t b, uint64_t& hi, uint64_t& lo) {
        __uint128_t p = static_cast<__uint128_t>(a) * b;
        hi = static_cast<uint64_t>(p >> 64);
        lo = static_cast<uint64_t>(p);
    }

    static std::array<uint64_t, 4> single_round(const std::array<uint64_t, 4>& c,
                                                const std::array<uint64_t, 2>& k) {
        uint64_t hi0, lo0, hi1, lo1;
        mulhilo(M0, c[0], hi0, lo0);
        mulhilo(M1, c[2], hi1, lo1);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
};

/// Buffered stream view over Philox blocks for one (seed, stream) pair.
class CounterStream {
public:
    CounterStream(uint64_t seed, uint64_t stream) : key_{seed, stream} {}

    uint64_t next_u64() {
        if (pos_ == 4) {
            buf_ = Philox4x64::block(ctr_, key_);
            pos_ = 0;
            // 256-bit counter increment
            for (int i = 0; i < 4; ++i)
                if (++ctr_[i] != 0) break;
        }
        return buf_[pos_++];
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [a, b).
    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    /// Exponential with the given rate; +infinity when rate == 0.
    double exponential(double rate) {
        if (rate <= 0.0) return std::numeric_limits<double>::infinity();
        return -std::log1p(-uniform01()) / rate;
    }

    /// Uniform angle in [0, 2 pi).
    double uniform_angle() { return uniform01() * 6.283185307179586476925286766559; }

private:
    std::array<uint64_t, 2> key_;
    std::array<uint64_t, 4> ctr_{0, 0, 0, 0};
    std::array<uint64_t, 4> buf_{};
    int pos_ = 4;
};

}  // namespace qsdlab
