#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace ergocert {

inline constexpr std::size_t kDefaultSupportCap = 4096;

/// Probability mass function on {0, 1, ...} stored densely from `offset`.
///
/// Mass beyond the stored range is accounted for by `tail_mass_bound`; the
/// stored sum plus the tail must equal 1 within 1e-12.
class Pmf {
 public:
  /// The point mass at 0.
  Pmf();
  Pmf(std::size_t offset, std::vector<double> masses, double tail_mass_bound = 0.0);

  static Pmf delta(std::size_t k);
  /// Normalizes nonnegative weights to a Pmf with zero tail.
  static Pmf from_weights(std::size_t offset, const std::vector<double>& weights);
  /// p(k) = q (1-q)^{k-1} for k = 1..n_terms, tail (1-q)^{n_terms}.
  static Pmf geometric(double q, std::size_t n_terms);

  std::size_t offset() const { return offset_; }
  const std::vector<double>& masses() const { return masses_; }
  double tail_mass_bound() const { return tail_; }
  /// One past the largest stored index.
  std::size_t end() const { return offset_ + masses_.size(); }
  /// Largest stored index.
  std::size_t last() const { return end() - 1; }
  double operator()(std::size_t k) const {
    return (k < offset_ || k >= end()) ? 0.0 : masses_[k - offset_];
  }
  double stored_mass() const;
  /// Mean over the stored support; throws when the tail exceeds 1e-12.
  double mean() const;
  /// p(0) == 0.
  bool is_increment() const { return (*this)(0) == 0.0; }
  /// Throws InvalidInput unless p(0) == 0.
  void require_increment(const char* what) const;

 private:
  std::size_t offset_ = 0;
  std::vector<double> masses_;
  double tail_ = 0.0;
};

struct TruncationReport {
  bool truncated = false;
  std::size_t dropped_entries = 0;
  double dropped_mass = 0.0;
};

struct ConvolveOptions {
  std::size_t support_cap = kDefaultSupportCap;
  /// Receives the truncation details. When null, truncation throws TruncationError.
  TruncationReport* report = nullptr;
};

Pmf convolve(const Pmf& f, const Pmf& g, const ConvolveOptions& opts = {});

/// Text form: "tail_mass_bound <x>" header, then one "index mass" pair per line.
std::string to_text(const Pmf& p);
Pmf pmf_from_text(const std::string& text);

}  // namespace ergocert
