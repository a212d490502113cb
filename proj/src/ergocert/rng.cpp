#include "ergocert/rng.hpp"

#include <algorithm>
#include <boost/random/normal_distribution.hpp>
#include <cstdlib>
#include <exception>
#include <functional>
#include <thread>

#include "ergocert/error.hpp"

namespace ergocert {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t s = seed;
  const std::uint64_t a = splitmix64(s);
  std::uint64_t t = a ^ (index * 0xD1B54A32D192ED03ULL);
  splitmix64(t);
  return splitmix64(t);
}

double Rng::normal() {
  boost::random::normal_distribution<double> n01;
  return n01(eng_);
}

PmfSampler::PmfSampler(const Pmf& p) : offset_(p.offset()), cdf_(p.masses().size()) {
  double acc = 0.0;
  for (std::size_t i = 0; i < cdf_.size(); ++i) {
    acc += p.masses()[i];
    cdf_[i] = acc;
  }
}

std::size_t PmfSampler::operator()(Rng& rng) const {
  const double u = rng.uniform();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return offset_ + static_cast<std::size_t>(it - cdf_.begin());
}

unsigned thread_count() {
  if (const char* env = std::getenv("ERGOCERT_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(thread_count(), std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t block = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        const std::size_t hi = std::min(n, (w + 1) * block);
        for (std::size_t i = w * block; i < hi; ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace ergocert
