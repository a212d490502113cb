#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "ergocert/chain_cert.hpp"
#include "ergocert/finite_chain.hpp"
#include "ergocert/pmf.hpp"

namespace ergocert {

/// Unique stationary law of an irreducible chain; residual ||pi P - pi||_inf <= 1e-12.
Eigen::VectorXd invariant_exact(const FiniteChain& chain);

/// sup over 1 <= f <= V of |E_x f(X_n) - pi(f)|, closed form over the box.
double exact_deviation(const FiniteChain& chain, const Eigen::VectorXd& v, int x, long n);

/// sup_{1<=f<=V} |mu(f)| for a signed measure mu.
double v_norm_sup(const Eigen::VectorXd& mu, const Eigen::VectorXd& v);

/// exact_deviation for n = 0..n_max in one pass.
std::vector<double> deviation_curve(const FiniteChain& chain, const Eigen::VectorXd& v, int x,
                                    long n_max);

struct DeviationReport {
  long n = 0;
  double exact_dev = 0.0;
  XReal bound;  ///< R e^{-kappa n} V(x); may exceed the double range
  XReal log_bound;
  XReal slack;  ///< bound - exact_dev
};

std::vector<DeviationReport> deviation_reports(const FiniteChain& chain, const Eigen::VectorXd& v,
                                               int x, long n_max, const Certificate& cert);

std::vector<int> simulate_chain(const FiniteChain& chain, int x0, long n, std::uint64_t seed);

struct MeanEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  /// ln(mean); finite even when the mean overflows a double.
  double log_mean = 0.0;
};

struct CouplingEstimates {
  MeanEstimate exp_r_sigma1;       ///< E e^{r sigma_1}
  MeanEstimate exp_gamma1_varpi;   ///< E e^{gamma1 varpi}
  std::vector<double> tail_tau;    ///< P(tau > n), n = 0..tail_len
  std::vector<double> sigma1_freq; ///< empirical P(sigma_1 = l), l = 0..tail_len
  std::size_t n_paths = 0;
  std::size_t censored = 0;        ///< paths with no coupling before the horizon
  std::uint64_t seed = 0;
  double r = 0.0;
  double gamma1 = 0.0;
  std::string warning;
};

struct CouplingOptions {
  std::size_t n_paths = 100000;
  std::size_t horizon = 1000000;
  std::size_t tail_len = 200;
  std::uint64_t seed = 0;
  double r = 0.1;
  double gamma1 = 0.01;
};

/// Simulates two forward-recurrence chains W (delay a) and W' (delay b) with
/// increments p and records sigma_1, varpi and the coupling time tau per path.
CouplingEstimates simulate_coupling(const Pmf& a, const Pmf& b, const Pmf& p,
                                    const CouplingOptions& opts);

}  // namespace ergocert
