#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ergocert/chain_cert.hpp"
#include "ergocert/magnitude.hpp"

namespace ergocert {

/// Drift class: |S| <= M on |x| <= a and -L <= S' <= -1/L on |x| >= a.
struct DriftClassParams {
  double m_bound = 1.0;
  double a_radius = 1.0;
  double l_param = 1.0;
  double epsilon = 0.5;
  void validate() const;
};

using RealFn = std::function<double(double)>;

/// dy = S(y) dt + sigma(y) dW with sigma0 <= sigma <= sigma1.
struct DiffusionModel {
  RealFn drift;
  RealFn drift_derivative;
  RealFn sigma;
  /// sigma'; only used through S~ = S(g)/sigma(g) - sigma'(g)/2.
  RealFn sigma_derivative;
  double sigma0 = 1.0;
  double sigma1 = 1.0;
  /// Caller-certified bound on |dS~/dz| over the compact |z| <= 3k used by the
  /// minorization constant (equal to sup |S'| there when sigma is constant).
  double s_deriv_compact_bound = 0.0;
  bool constant_sigma = true;

  /// S(x) = -theta (x - mean), constant sigma.
  static DiffusionModel ou(double theta = 1.0, double sigma = 1.0, double mean = 0.0);
  /// Linear interpolation through (knots, values), extended with the given tail slopes.
  static DiffusionModel piecewise_linear(std::vector<double> knots, std::vector<double> values,
                                         double left_slope, double right_slope,
                                         double sigma = 1.0);
  /// Cubic Hermite interpolation through (x, S, S') triples, extended linearly.
  static DiffusionModel tabulated(std::vector<double> x, std::vector<double> s,
                                  std::vector<double> s_dot, double sigma = 1.0);
  /// sigma(x) = base + amplitude tanh(x), |amplitude| < base.
  void set_tanh_sigma(double base, double amplitude);
  void set_constant_sigma(double value);
};

/// V(x) = (1 + x^2)^eps and its first two derivatives.
double lyapunov_v(double x, double eps);
double lyapunov_v1(double x, double eps);
double lyapunov_v2(double x, double eps);

struct LyapunovParams {
  double gamma = 0.0;
  double beta = 0.0;
  double beta_at = 0.0;  ///< |x| achieving the sup
  double x_star = 0.0;
};

/// gamma = eps / (2L), x* = max(2L(M + aL), sqrt(1 + 2L sigma1^2)) and
/// beta = sup_{|x|<=x*} |V'|(M + L x*) + sigma1^2 max(V'', 0)/2 + gamma V.
LyapunovParams lyapunov_params(const DriftClassParams& cls, double sigma1);

struct LyapunovReport {
  double gamma = 0.0;
  double beta = 0.0;
  double beta_at = 0.0;
  double x_star = 0.0;
  double rho = 0.0;
  double d_const = 0.0;
  double k_radius = 0.0;
  bool k_degenerate = false;
  long grid_points = 0;
  long grid_violations = 0;
  double worst_x = 0.0;
  double worst_margin = 0.0;  ///< max of generator + gamma V - beta over the grid
  bool passed() const { return grid_violations == 0; }
};

/// Grid check of the class membership and sigma bounds on |x| <= x_max.
/// Returns one message per violated condition, empty when the model is in class.
std::vector<std::string> class_violations(const DiffusionModel& model, const DriftClassParams& cls,
                                          double x_max, long points = 100001);

/// Verifies V'S + sigma^2 V''/2 <= -gamma V + beta on |x| <= 10 x* and derives
/// rho = 1 - e^{-gamma/2}, D = beta/gamma and K. Throws ConditionFailure when the
/// class check fails.
LyapunovReport drift_check(const DiffusionModel& model, const DriftClassParams& cls,
                           long points = 100001, double tol = 1e-9);

/// P(max_{0<=u<=1} |w_u| <= k) for standard Brownian motion.
double brownian_max_prob(double k);

/// f(x) = int_0^x du / sigma(u) and its inverse.
double lamperti(const DiffusionModel& model, double x);
double lamperti_inverse(const DiffusionModel& model, double z);

struct MinorizationReport {
  double k_radius = 0.0;
  double k_f = 0.0;  ///< k = max(f(K), -f(-K)); C = {x : |f(x)| <= k}
  double c_lo = 0.0;
  double c_hi = 0.0;
  double v1 = 0.0;
  double v2 = 0.0;
  double v3 = 0.0;
  double s_tilde_sup = 0.0;
  /// P(x, .) >= delta_k nu_K on C.
  Magnitude delta_k;
  /// Constant handed to the chain certificate (P >= 2 delta nu), delta < 1/2.
  Magnitude delta;
  std::vector<std::string> notes;
  /// Density of nu_K: e^{-f(y)^2/2} 1_C(y) / v3.
  double nu_density(const DiffusionModel& model, double y) const;
};

MinorizationReport minorization_params(double k_radius, const DiffusionModel& model);

/// Invariant density proportional to sigma^{-2} exp(2 int_0^x S/sigma^2), normalized on
/// |x| <= x_cut with a certified bound on the mass outside.
class InvariantDensity {
 public:
  InvariantDensity(const DiffusionModel& model, const DriftClassParams& cls, double tol = 1e-13);

  double density(double x) const;
  double cdf(double x) const;
  /// pi(g) for bounded g; the truncation error is at most sup|g| * tail_bound().
  double expectation(const RealFn& g) const;
  double x_cut() const { return x_cut_; }
  /// Bound on the normalized mass outside [-x_cut, x_cut].
  double tail_bound() const { return tail_; }

 private:
  double h_at(double x) const;
  double log_unnormalized(double x) const;

  DiffusionModel model_;
  double x_cut_ = 0.0;
  double step_ = 0.0;
  std::vector<double> nodes_;
  std::vector<double> h_;     ///< 2 int_0^x S/sigma^2 at the nodes
  std::vector<double> mass_;  ///< cumulative normalized mass at the nodes
  double shift_ = 0.0;
  double log_z_ = 0.0;
  double tail_ = 0.0;
};

struct SkeletonPath {
  std::vector<double> skeleton;  ///< y at t = 0, 1, ..., floor(t_end)
  double y_end = 0.0;
};

/// Euler-Maruyama with dt <= 1e-2 rounded to 1/round(1/dt). Uses substream 0 of seed.
SkeletonPath euler_simulate(const DiffusionModel& model, double x0, double t_end, double dt,
                            std::uint64_t seed);

/// Skeleton values of n_paths independent paths; path i uses substream i.
struct Ensemble {
  std::size_t n_paths = 0;
  std::size_t n_times = 0;
  std::vector<double> values;  ///< row-major [path][time]
  double at(std::size_t path, std::size_t t) const { return values[path * n_times + t]; }
};
Ensemble euler_ensemble(const DiffusionModel& model, double x0, double t_end, double dt,
                        std::size_t n_paths, std::uint64_t seed);

struct DiffusionCertificate {
  LyapunovReport lyapunov;
  MinorizationReport minorization;
  double v_star = 1.0;
  double epsilon = 0.5;
  Certificate cert;
  /// ln(R e^{-kappa floor(t)} (1 + x^2)^eps).
  XReal log_bound(double t, double x) const;
};

/// Drift check, minorization on C, then the chain certificate with V* = sup_C V.
DiffusionCertificate certify_diffusion(const DriftClassParams& cls, const DiffusionModel& model);

/// Smoothed indicator of [-1/2, 1]; values in (0, 1), so its weighted norm is at most 1.
double smooth_bump(double x);

struct EmpiricalRow {
  double x0 = 0.0;
  long t = 0;
  double mc_mean = 0.0;
  double mc_stderr = 0.0;
  double pi_g = 0.0;
  XReal log_bound;
  /// |mc_mean - pi_g| <= R e^{-kappa t} V(x0) + 3 mc_stderr.
  bool dominated = false;
};

/// Monte Carlo E g(y_t) for t = 1..t_max from each x0 against pi(g) and the certificate.
/// Paths are seeded by substream(seed + start index, path).
std::vector<EmpiricalRow> empirical_domination(const DiffusionCertificate& dc,
                                               const DiffusionModel& model,
                                               const InvariantDensity& inv, const RealFn& g,
                                               const std::vector<double>& x0s, long t_max,
                                               std::size_t n_paths, double dt, std::uint64_t seed);

}  // namespace ergocert
