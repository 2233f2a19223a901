#pragma once

#include <array>
#include <cstdint>

namespace sdeconv {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Output is a
// pure function of (key, counter); there is no hidden state.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kW0;
        key[1] += kW1;
      }
      const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57;
  static constexpr std::uint32_t kW0 = 0x9E3779B9;
  static constexpr std::uint32_t kW1 = 0xBB67AE85;
};

// Uniform in the open interval (0,1) on the midpoints of a 2^-52 grid; with 53
// bits the top value (2^53 - 1/2) 2^-53 would round up to 1.
inline double to_open_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

// Two uniforms for block `block` of stream `stream` under `seed`.
inline std::array<double, 2> philox_uniform_pair(std::uint64_t seed, std::uint64_t stream,
                                                 std::uint64_t block) {
  const Philox4x32::Counter ctr{static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
                                static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  const Philox4x32::Key key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  const auto out = Philox4x32::generate(ctr, key);
  const std::uint64_t a = (std::uint64_t{out[0]} << 32) | out[1];
  const std::uint64_t b = (std::uint64_t{out[2]} << 32) | out[3];
  return {to_open_unit(a), to_open_unit(b)};
}

}  // namespace sdeconv
