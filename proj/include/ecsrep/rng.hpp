#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace ecsrep {

// Philox4x32-10 counter-based generator (Salmon et al. 2011 constants).
// A (seed, stream_id) pair addresses an independent sequence, so per-trial
// streams never overlap and parallel aggregation stays deterministic.
class PhiloxStream {
public:
    PhiloxStream(std::uint64_t seed, std::uint64_t stream_id)
        : key_{static_cast<std::uint32_t>(seed),
               static_cast<std::uint32_t>(seed >> 32)},
          counter_{0, 0,
                   static_cast<std::uint32_t>(stream_id),
                   static_cast<std::uint32_t>(stream_id >> 32)},
          word_(2) {}

    std::uint64_t next_u64() {
        if (word_ == 2) {
            block_ = philox10(counter_, key_);
            // 128-bit counter increment; the stream id occupies the high words.
            if (++counter_[0] == 0) ++counter_[1];
            word_ = 0;
        }
        const int w = 2 * word_++;
        return (static_cast<std::uint64_t>(block_[w]) << 32) | block_[w + 1];
    }

    // Strictly inside (0,1): the half-step keeps both endpoints unreachable.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
    }

    // Number of attempts until first success, support {1, 2, ...}.
    std::uint64_t geometric(double p) {
        if (!(p > 0.0) || p > 1.0)
            throw std::invalid_argument("geometric: p must be in (0, 1]");
        if (p == 1.0) return 1;
        const double r = std::log(uniform()) / std::log1p(-p);
        if (r >= 9.0e18) return static_cast<std::uint64_t>(9.0e18);
        return 1 + static_cast<std::uint64_t>(r);
    }

    using block_type = std::array<std::uint32_t, 4>;
    using key_type = std::array<std::uint32_t, 2>;

    // One keyed bijection of the counter block; exposed for known-answer tests.
    static block_type philox10(block_type ctr, key_type key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += 0x9E3779B9u;
                key[1] += 0xBB67AE85u;
            }
            const std::uint64_t p0 = 0xD2511F53ull * ctr[0];
            const std::uint64_t p1 = 0xCD9E8D57ull * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
                   static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
                   static_cast<std::uint32_t>(p0)};
        }
        return ctr;
    }

private:
    key_type key_;
    block_type counter_;
    block_type block_{};
    int word_;
};

} // namespace ecsrep
