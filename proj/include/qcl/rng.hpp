#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace qcl {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Stateless: every
/// (key, counter) pair maps to four independent 32-bit words.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter ctr, Key key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Gaussian noise addressed by (step, channel) for one trajectory of one seeded run.
/// Draws do not depend on call order, so any scheduling gives the same numbers.
class NoiseStream {
public:
    NoiseStream(std::uint64_t seed, std::uint32_t trajectory)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          trajectory_(trajectory) {}

    /// Two independent standard normals for the given step and channel.
    std::array<double, 2> normal_pair(std::uint64_t step, std::uint32_t channel) const {
        const auto w = Philox4x32::generate(
            {static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32), channel,
             trajectory_},
            key_);
        // 53-bit uniforms in (0, 1]
        const double u1 = (double((std::uint64_t{w[0]} << 21) ^ (w[1] >> 11)) + 1.0) * 0x1p-53;
        const double u2 = double((std::uint64_t{w[2]} << 21) ^ (w[3] >> 11)) * 0x1p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(a), r * std::sin(a)};
    }

    double normal(std::uint64_t step, std::uint32_t channel) const {
        return normal_pair(step, channel)[0];
    }

    std::uint32_t trajectory() const { return trajectory_; }

private:
    Philox4x32::Key key_;
    std::uint32_t trajectory_;
};

}  // namespace qcl
