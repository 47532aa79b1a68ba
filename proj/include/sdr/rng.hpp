#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace sdr {

/// Counter-based RNG (Philox 4x32, 10 rounds). Every 128-bit block is a
/// pure function of (seed, stream, block index), so walker i's draws depend
/// only on the seed and i — never on scheduling or worker count.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    /// Two uniforms in (0, 1], 53-bit resolution.
    std::array<double, 2> uniform_pair(std::uint64_t block) const {
        const auto words = philox(block);
        const std::uint64_t a =
            (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
        const std::uint64_t b =
            (static_cast<std::uint64_t>(words[2]) << 32) | words[3];
        return {to_unit(a), to_unit(b)};
    }

    /// Two independent standard normals (Box-Muller).
    std::array<double, 2> normal_pair(std::uint64_t block) const {
        const auto u = uniform_pair(block);
        const double r = std::sqrt(-2.0 * std::log(u[0]));
        const double phi = 2.0 * std::numbers::pi * u[1];
        return {r * std::cos(phi), r * std::sin(phi)};
    }

  private:
    static double to_unit(std::uint64_t v) {
        return (static_cast<double>(v >> 11) + 1.0) * 0x1.0p-53;
    }

    std::array<std::uint32_t, 4> philox(std::uint64_t block) const {
        constexpr std::uint32_t kMul0 = 0xD2511F53u;
        constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
        constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
        constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

        std::array<std::uint32_t, 4> ctr{
            static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
            static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
        std::uint32_t k0 = key_[0], k1 = key_[1];
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ k0,
                   static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ k1,
                   static_cast<std::uint32_t>(p0)};
            k0 += kWeyl0;
            k1 += kWeyl1;
        }
        return ctr;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
};

/// Numerically stable fixed-order pairwise sum; independent of how the
/// values were produced.
double pairwise_sum(const double* data, std::size_t n);

}  // namespace sdr
