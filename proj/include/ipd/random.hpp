#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace ipd {

using Rng = std::mt19937_64;

/// Stream tags so that independent consumers of one master seed never share
/// a random stream by accident.
enum class StreamTag : std::uint64_t {
  Retain = 1,
  Refit = 2,
  Recalibrate = 3,
  Paired = 4,
  Training = 10,
  Holdout = 11,
  Calibration = 12,
  Forest = 13,
  CrossValidation = 14,
  NullScenario = 20,
  PreferenceDraws = 21,
  FreshDraws = 22,
};

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Order-sensitive hash of a master seed and a path of indices.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t v : path) h = splitmix64(h ^ splitmix64(v + 0x632BE59BD9B4E019ull));
  return h;
}

inline std::uint64_t derive_seed(std::uint64_t master, StreamTag tag, std::initializer_list<std::uint64_t> path = {}) noexcept {
  std::uint64_t h = derive_seed(master, {static_cast<std::uint64_t>(tag)});
  for (std::uint64_t v : path) h = splitmix64(h ^ splitmix64(v + 0x632BE59BD9B4E019ull));
  return h;
}

/// `count` indices drawn uniformly with replacement from [0, population).
inline std::vector<std::size_t> resample_indices(std::size_t population, std::size_t count, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, population - 1);
  std::vector<std::size_t> out(count);
  for (auto& i : out) i = pick(rng);
  return out;
}

}  // namespace ipd
