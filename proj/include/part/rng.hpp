#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace part {

using Rng = std::mt19937_64;

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Child seed of `parent` along a path of stream ids. Seeds derived along
// different paths are independent of the order in which they are requested.
inline std::uint64_t derive_seed(std::uint64_t parent,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = mix64(parent);
  for (auto id : path) s = mix64(s ^ mix64(id + 0x632be59bd9b4e019ULL));
  return s;
}

inline Rng make_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32)};
  return Rng(seq);
}

// Stream tags for derive_seed.
namespace stream {
inline constexpr std::uint64_t kTree = 1;
inline constexpr std::uint64_t kResample = 2;
inline constexpr std::uint64_t kRetry = 3;
inline constexpr std::uint64_t kStage = 4;
inline constexpr std::uint64_t kSubset = 5;
inline constexpr std::uint64_t kNode = 6;
}  // namespace stream

}  // namespace part
