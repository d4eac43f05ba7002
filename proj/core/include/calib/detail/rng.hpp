#ifndef CALIB_DETAIL_RNG_HPP_
#define CALIB_DETAIL_RNG_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace calib::detail {

/// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent generator for iteration `stream` of a run seeded with `seed`.
inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(mix64(mix64(seed) ^ mix64(stream + 0x632be59bd9b4e019ULL)));
}

/// k distinct indices from [0, n) by partial Fisher-Yates.
inline std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, std::mt19937_64& rng) {
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace calib::detail

#endif  // CALIB_DETAIL_RNG_HPP_
