#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "ergocert/pmf.hpp"

namespace ergocert {

/// Seed of the index-th independent substream (SplitMix64 of the pair).
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index);

/// mt19937_64 with a 53-bit uniform and Boost's ziggurat normal.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  static Rng substream(std::uint64_t seed, std::uint64_t index) {
    return Rng(substream_seed(seed, index));
  }
  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double normal();
  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

/// Inverse-CDF sampler over a Pmf. Draws in the tail return end().
class PmfSampler {
 public:
  explicit PmfSampler(const Pmf& p);
  std::size_t operator()(Rng& rng) const;

 private:
  std::size_t offset_ = 0;
  std::vector<double> cdf_;
};

/// Worker count: ERGOCERT_THREADS if set (>= 1), else the hardware concurrency.
unsigned thread_count();

/// Runs body(i) for i in [0, n) across thread_count() workers in contiguous blocks.
/// The body must only write to slot i of caller-owned storage.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace ergocert
