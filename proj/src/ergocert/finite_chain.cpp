#include "ergocert/finite_chain.hpp"

#include <cmath>
#include <cstdio>

#include "ergocert/error.hpp"

namespace ergocert {

namespace {

bool all_reached(const Eigen::MatrixXd& p, bool transpose) {
  const int n = static_cast<int>(p.rows());
  std::vector<bool> seen(n, false);
  std::vector<int> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    const int x = stack.back();
    stack.pop_back();
    for (int y = 0; y < n; ++y) {
      const double w = transpose ? p(y, x) : p(x, y);
      if (w > 0.0 && !seen[y]) {
        seen[y] = true;
        stack.push_back(y);
      }
    }
  }
  for (bool s : seen) {
    if (!s) return false;
  }
  return true;
}

}  // namespace

FiniteChain::FiniteChain(Eigen::MatrixXd p, std::vector<std::string> labels)
    : transition(std::move(p)), state_labels(std::move(labels)) {
  const auto n = transition.rows();
  if (n == 0 || transition.cols() != n) {
    throw InvalidInput("transition matrix must be square and nonempty");
  }
  if (!state_labels.empty() && static_cast<Eigen::Index>(state_labels.size()) != n) {
    throw InvalidInput("state_labels length does not match the matrix");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double w = transition(i, j);
      if (!std::isfinite(w) || w < 0.0) {
        throw InvalidInput("transition entry (" + std::to_string(i) + ", " + std::to_string(j) +
                           ") is negative or not finite");
      }
      s += w;
    }
    if (std::fabs(s - 1.0) > 1e-12) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", s);
      throw InvalidInput("row " + std::to_string(i) + " sums to " + buf + ", not 1");
    }
  }
}

FiniteChain FiniteChain::from_rows(const std::vector<std::vector<double>>& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd p(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != n) {
      throw InvalidInput("row " + std::to_string(i) + " has the wrong length");
    }
    for (Eigen::Index j = 0; j < n; ++j) p(i, j) = rows[i][j];
  }
  return FiniteChain(std::move(p));
}

bool FiniteChain::irreducible() const {
  return all_reached(transition, false) && all_reached(transition, true);
}

std::vector<bool> membership(int n_states, const std::vector<int>& set, const char* what) {
  std::vector<bool> in(n_states, false);
  for (int x : set) {
    if (x < 0 || x >= n_states) {
      throw InvalidInput(std::string(what) + ": state index " + std::to_string(x) +
                         " out of range");
    }
    if (in[x]) throw InvalidInput(std::string(what) + ": duplicate state " + std::to_string(x));
    in[x] = true;
  }
  return in;
}

}  // namespace ergocert
