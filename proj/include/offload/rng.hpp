#pragma once

#include <cstdint>
#include <random>

namespace offload {

// Independent random streams derived from one run seed. Each consumer draws from
// its own stream so that, e.g., link realizations do not depend on the policy.
enum class Stream : std::uint64_t {
  Servers = 1,
  TaskTypes = 2,
  Propagation = 3,
  Links = 4,
  Arrivals = 5,
  Predictor = 6,
  Policy = 7,
  Instance = 8,
};

// splitmix64 finalizer.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t index = 0) {
  return mix_seed(mix_seed(seed ^ mix_seed(static_cast<std::uint64_t>(stream))) + index);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, Stream stream, std::uint64_t index = 0) {
  return std::mt19937_64(derive_seed(seed, stream, index));
}

}  // namespace offload
