#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace gatelab {

using Engine = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Hashes an ordered key tuple into a stream seed. Distinct tuples give
// independent-looking streams; the same tuple always gives the same one.
constexpr std::uint64_t stream_key(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x6a09e667f3bcc908ULL;
  for (std::uint64_t p : parts) h = splitmix64(h ^ splitmix64(p));
  return h;
}

inline Engine make_engine(std::initializer_list<std::uint64_t> parts) {
  return Engine(stream_key(parts));
}

// Stream tags keep unrelated consumers of the same seed apart.
namespace stream {
inline constexpr std::uint64_t tasks = 0x7461736b;
inline constexpr std::uint64_t completions = 0x636f6d70;
inline constexpr std::uint64_t random_select = 0x72616e64;
inline constexpr std::uint64_t mc_gradient = 0x67726164;
inline constexpr std::uint64_t bootstrap = 0x626f6f74;
inline constexpr std::uint64_t ascent = 0x61736365;
inline constexpr std::uint64_t covariance = 0x636f7661;
}  // namespace stream

}  // namespace gatelab
