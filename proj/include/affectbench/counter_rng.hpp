#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., "Parallel random
// numbers: as easy as 1, 2, 3", SC'11). Output is a pure function of
// (key, counter), so any pixel of any frame can be drawn independently and in
// any order with bit-identical results on every platform.

#include <array>
#include <cstdint>
#include <string_view>

namespace affectbench::rng {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

namespace detail {
inline constexpr std::uint32_t kMul0 = 0xD2511F53u;
inline constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

constexpr void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = std::uint64_t(a) * b;
  hi = std::uint32_t(p >> 32);
  lo = std::uint32_t(p);
}

constexpr Counter round(const Counter& c, const Key& k) {
  std::uint32_t hi0 = 0, lo0 = 0, hi1 = 0, lo1 = 0;
  mulhilo(kMul0, c[0], hi0, lo0);
  mulhilo(kMul1, c[2], hi1, lo1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}
}  // namespace detail

constexpr Counter philox4x32_10(Counter ctr, Key key) {
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      key[0] += detail::kWeyl0;
      key[1] += detail::kWeyl1;
    }
    ctr = detail::round(ctr, key);
  }
  return ctr;
}

constexpr Key key_from_seed(std::uint64_t seed) {
  return {std::uint32_t(seed), std::uint32_t(seed >> 32)};
}

/// Uniform double in [0, 1) with 53 random bits taken from two words.
constexpr double to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((std::uint64_t(hi) << 32) | lo) >> 11;
  return double(bits) * 0x1.0p-53;
}

/// Two independent uniforms for a stream position under `seed`.
struct UniformPair {
  double first;
  double second;
};

constexpr UniformPair uniform_pair(std::uint64_t seed, std::uint64_t position) {
  const Counter out = philox4x32_10({std::uint32_t(position), std::uint32_t(position >> 32), 0u, 0u},
                                    key_from_seed(seed));
  return {to_unit(out[0], out[1]), to_unit(out[2], out[3])};
}

/// Child seed for substream `stream` of `seed`. Uses a counter lane that
/// uniform_pair never touches, so derived seeds and draws do not collide.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  const Counter out = philox4x32_10({std::uint32_t(stream), std::uint32_t(stream >> 32), 0x5EEDu, 0u},
                                    key_from_seed(seed));
  return (std::uint64_t(out[1]) << 32) | out[0];
}

/// FNV-1a 64, used to turn identifiers into stream numbers.
constexpr std::uint64_t hash_string(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char ch : s) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace affectbench::rng
