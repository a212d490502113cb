#include "ergocert/markov_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ergocert/error.hpp"
#include "ergocert/rng.hpp"

namespace ergocert {

namespace {

struct Neumaier {
  double sum = 0.0;
  double c = 0.0;
  void add(double x) {
    const double t = sum + x;
    c += std::fabs(sum) >= std::fabs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + c; }
};

// Mean and standard error of e^{x_i}, accumulated around the largest exponent.
MeanEstimate exp_mean(const std::vector<double>& xs) {
  MeanEstimate out;
  if (xs.empty()) {
    out.mean = out.stderr_ = std::numeric_limits<double>::quiet_NaN();
    out.log_mean = out.mean;
    return out;
  }
  const double m = *std::max_element(xs.begin(), xs.end());
  Neumaier s1;
  Neumaier s2;
  for (double x : xs) {
    const double e = std::exp(x - m);
    s1.add(e);
    s2.add(e * e);
  }
  const double n = static_cast<double>(xs.size());
  const double m1 = s1.value() / n;
  const double m2 = s2.value() / n;
  out.log_mean = m + std::log(m1);
  out.mean = std::exp(out.log_mean);
  const double var = xs.size() > 1 ? std::max(0.0, m2 - m1 * m1) * n / (n - 1.0) : 0.0;
  out.stderr_ = std::exp(m) * std::sqrt(var / n);
  return out;
}

std::vector<std::vector<double>> row_cdfs(const FiniteChain& chain) {
  const int n = chain.n_states();
  std::vector<std::vector<double>> cdf(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      acc += chain.transition(i, j);
      cdf[i][j] = acc;
    }
  }
  return cdf;
}

}  // namespace

Eigen::VectorXd invariant_exact(const FiniteChain& chain) {
  if (!chain.irreducible()) throw InvalidInput("invariant_exact: chain is reducible");
  const int n = chain.n_states();
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - chain.transition.transpose();
  a.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;
  const auto lu = a.fullPivLu();
  Eigen::VectorXd pi = lu.solve(b);
  // One refinement pass brings the fixed-point residual to rounding level.
  pi += lu.solve(b - a * pi);
  pi = pi.cwiseMax(0.0);
  pi /= pi.sum();
  const double res = (pi.transpose() * chain.transition - pi.transpose()).cwiseAbs().maxCoeff();
  if (res > 1e-12) {
    throw Error("invariant_exact: residual " + std::to_string(res) + " exceeds 1e-12");
  }
  return pi;
}

double v_norm_sup(const Eigen::VectorXd& mu, const Eigen::VectorXd& v) {
  double hi = 0.0;  // f = V where mu > 0, 1 elsewhere
  double lo = 0.0;  // f = 1 where mu > 0, V elsewhere
  for (Eigen::Index z = 0; z < mu.size(); ++z) {
    if (mu(z) > 0.0) {
      hi += mu(z) * v(z);
      lo += mu(z);
    } else {
      hi += mu(z);
      lo += mu(z) * v(z);
    }
  }
  return std::max(std::fabs(hi), std::fabs(lo));
}

std::vector<double> deviation_curve(const FiniteChain& chain, const Eigen::VectorXd& v, int x,
                                    long n_max) {
  const int n = chain.n_states();
  if (v.size() != n) throw InvalidInput("deviation: V has the wrong length");
  if ((v.array() < 1.0).any()) throw InvalidInput("deviation: V must be >= 1");
  if (x < 0 || x >= n) throw InvalidInput("deviation: start state out of range");
  if (n_max < 0) throw InvalidInput("deviation: n must be >= 0");
  const Eigen::VectorXd pi = invariant_exact(chain);
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
  row(x) = 1.0;
  std::vector<double> out(static_cast<std::size_t>(n_max) + 1);
  for (long k = 0; k <= n_max; ++k) {
    if (k > 0) row = row * chain.transition;
    out[static_cast<std::size_t>(k)] = v_norm_sup(row.transpose() - pi, v);
  }
  return out;
}

double exact_deviation(const FiniteChain& chain, const Eigen::VectorXd& v, int x, long n) {
  return deviation_curve(chain, v, x, n).back();
}

std::vector<DeviationReport> deviation_reports(const FiniteChain& chain, const Eigen::VectorXd& v,
                                               int x, long n_max, const Certificate& cert) {
  const auto dev = deviation_curve(chain, v, x, n_max);
  std::vector<DeviationReport> out(dev.size());
  for (std::size_t k = 0; k < dev.size(); ++k) {
    auto& r = out[k];
    r.n = static_cast<long>(k);
    r.exact_dev = dev[k];
    r.log_bound = cert.log_bound(static_cast<double>(k), v(x));
    r.bound = XReal::exp(r.log_bound);
    r.slack = r.bound - XReal(dev[k]);
  }
  return out;
}

std::vector<int> simulate_chain(const FiniteChain& chain, int x0, long n, std::uint64_t seed) {
  if (x0 < 0 || x0 >= chain.n_states()) throw InvalidInput("simulate_chain: x0 out of range");
  if (n < 0) throw InvalidInput("simulate_chain: n must be >= 0");
  const auto cdf = row_cdfs(chain);
  Rng rng = Rng::substream(seed, 0);
  std::vector<int> path(static_cast<std::size_t>(n) + 1);
  path[0] = x0;
  for (long k = 1; k <= n; ++k) {
    const auto& c = cdf[path[k - 1]];
    const double u = rng.uniform();
    auto it = std::upper_bound(c.begin(), c.end(), u);
    if (it == c.end()) --it;  // rounding in the last cumulative sum
    path[k] = static_cast<int>(it - c.begin());
  }
  return path;
}

CouplingEstimates simulate_coupling(const Pmf& a, const Pmf& b, const Pmf& p,
                                    const CouplingOptions& opts) {
  if (!(a(0) > 0.0)) throw InvalidInput("simulate_coupling: requires a(0) > 0");
  p.require_increment("simulate_coupling");
  if (opts.n_paths == 0 || opts.horizon == 0) {
    throw InvalidInput("simulate_coupling: n_paths and horizon must be positive");
  }
  const PmfSampler draw_a(a);
  const PmfSampler draw_b(b);
  const PmfSampler draw_p(p);

  struct PathResult {
    std::size_t sigma1 = 0;
    std::size_t varpi = 0;
    std::size_t tau = 0;  // 0 when censored
  };
  std::vector<PathResult> res(opts.n_paths);
  parallel_for(opts.n_paths, [&](std::size_t i) {
    Rng rng = Rng::substream(opts.seed, i);
    auto start = [&](const PmfSampler& delay) {
      const std::size_t y0 = delay(rng);
      return y0 > 0 ? y0 : draw_p(rng);
    };
    std::size_t w = start(draw_a);
    std::size_t w2 = start(draw_b);
    PathResult& out = res[i];
    std::size_t k = 0;
    for (std::size_t l = 1; l <= opts.horizon; ++l) {
      w = w == 1 ? draw_p(rng) : w - 1;
      w2 = w2 == 1 ? draw_p(rng) : w2 - 1;
      if (w != 1) continue;
      ++k;
      if (k == 1) out.sigma1 = l;
      if (w2 == 1) {
        out.varpi = k;
        out.tau = l;
        return;
      }
    }
  });

  CouplingEstimates est;
  est.n_paths = opts.n_paths;
  est.seed = opts.seed;
  est.r = opts.r;
  est.gamma1 = opts.gamma1;
  est.tail_tau.assign(opts.tail_len + 1, 0.0);
  est.sigma1_freq.assign(opts.tail_len + 1, 0.0);
  std::vector<double> xs_sigma;
  std::vector<double> xs_varpi;
  std::vector<std::size_t> tau_count(opts.tail_len + 2, 0);
  for (const auto& r : res) {
    if (r.sigma1 > 0) {
      xs_sigma.push_back(opts.r * static_cast<double>(r.sigma1));
      if (r.sigma1 <= opts.tail_len) est.sigma1_freq[r.sigma1] += 1.0;
    }
    if (r.tau == 0) {
      ++est.censored;
      ++tau_count[opts.tail_len + 1];
      continue;
    }
    xs_varpi.push_back(opts.gamma1 * static_cast<double>(r.varpi));
    ++tau_count[std::min(r.tau, opts.tail_len + 1)];
  }
  const double n = static_cast<double>(opts.n_paths);
  for (auto& f : est.sigma1_freq) f /= n;
  // P(tau > m) = 1 - P(tau <= m).
  std::size_t le = 0;
  for (std::size_t m = 0; m <= opts.tail_len; ++m) {
    le += tau_count[m];
    est.tail_tau[m] = 1.0 - static_cast<double>(le) / n;
  }
  est.exp_r_sigma1 = exp_mean(xs_sigma);
  est.exp_gamma1_varpi = exp_mean(xs_varpi);
  if (static_cast<double>(est.censored) > 1e-3 * n) {
    est.warning = "simulate_coupling: " + std::to_string(est.censored) + " of " +
                  std::to_string(opts.n_paths) + " paths did not couple within the horizon " +
                  std::to_string(opts.horizon);
  }
  return est;
}

}  // namespace ergocert
