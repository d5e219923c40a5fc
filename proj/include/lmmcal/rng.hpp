#pragma once

#include <array>
#include <cstdint>

#include "lmmcal/math.hpp"

namespace lmmcal {

// Philox4x32-10 counter-based generator. A path's stream is addressed by
// (seed, path index, substream), so draws for path i never depend on how many
// paths the run uses — parallel and serial runs produce identical numbers.
struct Philox4x32 {
    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key) {
        constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
        constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t(M0) * ctr[0];
            const std::uint64_t p1 = std::uint64_t(M1) * ctr[2];
            const std::array<std::uint32_t, 4> nxt{
                std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], std::uint32_t(p1),
                std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1], std::uint32_t(p0)};
            ctr = nxt;
            key[0] += W0;
            key[1] += W1;
        }
        return ctr;
    }
};

// Stream of standard normals for one (seed, path, substream) address.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t path, std::uint32_t substream = 0)
        : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)},
          base_{0, std::uint32_t(path), std::uint32_t(path >> 32), substream} {}

    double next() {
        if (have_ == 0) refill();
        return cache_[--have_];
    }

private:
    void refill() {
        auto ctr = base_;
        ctr[0] = draw_++;
        const auto r = Philox4x32::block(ctr, key_);
        cache_[1] = to_normal(r[0], r[1]);
        cache_[0] = to_normal(r[2], r[3]);
        have_ = 2;
    }
    static double to_normal(std::uint32_t a, std::uint32_t b) {
        // 53-bit uniform strictly inside (0,1), then inverse CDF.
        const double u = ((std::uint64_t(a >> 5) << 26) + (b >> 6) + 0.5) *
                         (1.0 / 9007199254740992.0);
        return inverse_normal_cdf(u);
    }

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> base_;
    std::uint32_t draw_ = 0;
    int have_ = 0;
    double cache_[2] = {0.0, 0.0};
};

}  // namespace lmmcal
