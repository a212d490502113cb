#pragma once
// Shared finite-chain fixtures and helpers for the unit tests.

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "ergocert/finite_chain.hpp"

namespace fixture {

using ergocert::FiniteChain;

// Single chain, V = 1, C = everything: rho = 1/2, D = 1/2, delta = 0.35, nu = (3/7, 4/7).
inline FiniteChain two_state() { return FiniteChain::from_rows({{0.6, 0.4}, {0.3, 0.7}}); }

// Three chains sharing V = (1, 2), C = {0}: rho = 0.25, D = 0.75, V* = 1, delta = 0.25.
inline std::vector<FiniteChain> family_b() {
  return {FiniteChain::from_rows({{0.6, 0.4}, {0.5, 0.5}}),
          FiniteChain::from_rows({{0.7, 0.3}, {0.6, 0.4}}),
          FiniteChain::from_rows({{0.5, 0.5}, {0.55, 0.45}})};
}
inline Eigen::VectorXd family_b_v() { return Eigen::Vector2d(1.0, 2.0); }

// Dense random chain with every entry at least floor / n.
inline FiniteChain random_chain(int n, std::mt19937_64& rng, double floor = 0.2) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd p(n, n);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
      p(i, j) = floor / n + u(rng);
      s += p(i, j);
    }
    p.row(i) /= s;
  }
  return FiniteChain(p);
}

// Largest feasible minorization on C for one chain: nu proportional to the column minima.
struct Minor {
  double delta;
  Eigen::VectorXd nu;
};
inline Minor column_min(const FiniteChain& ch, const std::vector<int>& c) {
  const int n = ch.n_states();
  Eigen::VectorXd m = Eigen::VectorXd::Zero(n);
  for (int y : c) {
    double lo = 1.0;
    for (int x : c) lo = std::min(lo, ch.transition(x, y));
    m(y) = lo;
  }
  const double mass = m.sum();
  return {std::min(mass / 2.0, 0.49), m / mass};
}

}  // namespace fixture
