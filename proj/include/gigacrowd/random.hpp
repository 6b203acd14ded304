#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace gigacrowd {

// splitmix64 finalizer; the building block for keyed substreams.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives a child seed from a parent seed and a sequence of stable keys
// (entity ids, sample indices, ...). Adding a key never perturbs siblings.
inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t h = mix64(seed);
  for (std::uint64_t k : keys) h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

// Uniform double in [0, 1) from a 64-bit hash.
constexpr double unit_from_bits(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Counter-based uniform draw: stateless, so masks and flips can be
// regenerated for any (key, index) without replaying a stream.
constexpr double counter_uniform(std::uint64_t key, std::uint64_t index) noexcept {
  return unit_from_bits(mix64(key ^ mix64(index)));
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed) { return Engine(seed); }

}  // namespace gigacrowd
