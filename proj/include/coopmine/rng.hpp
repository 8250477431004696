#pragma once

#include <array>
#include <cstdint>

namespace coopmine {

/// Philox4x32-10 counter-based generator: a pure function of (counter, key).
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Block generate(Block ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Two uniforms in [0, 1) keyed by a 64-bit seed and a three-word counter.
struct KeyedUniforms {
  double first;
  double second;
};

inline KeyedUniforms keyed_uniforms(std::uint64_t seed, std::uint32_t a, std::uint32_t b,
                                    std::uint32_t c) {
  const auto out = Philox4x32::generate({a, b, c, 0u}, {static_cast<std::uint32_t>(seed),
                                                       static_cast<std::uint32_t>(seed >> 32)});
  constexpr double scale = 0x1.0p-53;
  const std::uint64_t x = (std::uint64_t{out[0]} << 32) | out[1];
  const std::uint64_t y = (std::uint64_t{out[2]} << 32) | out[3];
  return {static_cast<double>(x >> 11) * scale, static_cast<double>(y >> 11) * scale};
}

}  // namespace coopmine
