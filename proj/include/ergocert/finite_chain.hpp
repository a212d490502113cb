#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace ergocert {

/// Row-stochastic transition matrix on {0, ..., n-1}.
struct FiniteChain {
  Eigen::MatrixXd transition;
  std::vector<std::string> state_labels;

  FiniteChain() = default;
  /// Validates: square, entries >= 0, every row sums to 1 within 1e-12.
  explicit FiniteChain(Eigen::MatrixXd p, std::vector<std::string> labels = {});
  static FiniteChain from_rows(const std::vector<std::vector<double>>& rows);

  int n_states() const { return static_cast<int>(transition.rows()); }
  /// Every state reaches every other state through positive entries.
  bool irreducible() const;
};

/// Indicator of a state set; throws on out-of-range or duplicate indices.
std::vector<bool> membership(int n_states, const std::vector<int>& set, const char* what);

}  // namespace ergocert
