#include "ergocert/diffusion.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <numeric>
#include <utility>

#include "ergocert/error.hpp"
#include "ergocert/rng.hpp"

namespace ergocert {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kBlowUp = 1e10;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Adaptive 15-point Gauss-Kronrod on [a, b].
template <class F>
double integrate(F f, double a, double b, double tol = 1e-12, unsigned depth = 8) {
  if (a == b) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, depth, tol);
}

// Single 15-point Gauss-Kronrod panel, for sub-cell pieces of a fine grid.
template <class F>
double panel(F f, double a, double b) {
  if (a == b) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0);
}

}  // namespace

void DriftClassParams::validate() const {
  if (!(m_bound > 0.0) || !std::isfinite(m_bound)) throw InvalidInput("class: M must be > 0");
  if (!(a_radius > 0.0) || !std::isfinite(a_radius)) throw InvalidInput("class: a must be > 0");
  if (!(l_param >= 1.0) || !std::isfinite(l_param)) throw InvalidInput("class: L must be >= 1");
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw InvalidInput("class: epsilon must lie in (0, 1]");
}

DiffusionModel DiffusionModel::ou(double theta, double sigma, double mean) {
  if (!(theta > 0.0)) throw InvalidInput("ou: theta must be > 0");
  DiffusionModel m;
  m.drift = [theta, mean](double x) { return -theta * (x - mean); };
  m.drift_derivative = [theta](double) { return -theta; };
  m.s_deriv_compact_bound = theta;
  m.set_constant_sigma(sigma);
  return m;
}

DiffusionModel DiffusionModel::piecewise_linear(std::vector<double> knots, std::vector<double> values,
                                                double left_slope, double right_slope,
                                                double sigma) {
  if (knots.empty() || knots.size() != values.size()) {
    throw InvalidInput("piecewise_linear: knots and values must be non-empty and equal length");
  }
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (!(knots[i] > knots[i - 1])) throw InvalidInput("piecewise_linear: knots must increase");
  }
  auto k = std::make_shared<const std::vector<double>>(std::move(knots));
  auto v = std::make_shared<const std::vector<double>>(std::move(values));
  // Slope of the piece containing x; at a knot the piece further from the origin.
  auto slope = [k, v, left_slope, right_slope](double x) {
    const auto& kn = *k;
    const bool outward_left = x < 0.0;
    if (x < kn.front() || (outward_left && x == kn.front())) return left_slope;
    if (x > kn.back() || (!outward_left && x == kn.back())) return right_slope;
    std::size_t i = std::upper_bound(kn.begin(), kn.end(), x) - kn.begin() - 1;
    if (outward_left && kn[i] == x) --i;
    return ((*v)[i + 1] - (*v)[i]) / (kn[i + 1] - kn[i]);
  };
  DiffusionModel m;
  m.drift = [k, v, slope](double x) {
    const auto& kn = *k;
    if (x <= kn.front()) return v->front() + slope(x) * (x - kn.front());
    if (x >= kn.back()) return v->back() + slope(x) * (x - kn.back());
    const std::size_t i = std::upper_bound(kn.begin(), kn.end(), x) - kn.begin() - 1;
    return (*v)[i] + ((*v)[i + 1] - (*v)[i]) / (kn[i + 1] - kn[i]) * (x - kn[i]);
  };
  m.drift_derivative = slope;
  double bound = std::max(std::fabs(left_slope), std::fabs(right_slope));
  for (std::size_t i = 0; i + 1 < k->size(); ++i) {
    bound = std::max(bound, std::fabs(((*v)[i + 1] - (*v)[i]) / ((*k)[i + 1] - (*k)[i])));
  }
  m.s_deriv_compact_bound = bound;
  m.set_constant_sigma(sigma);
  return m;
}

DiffusionModel DiffusionModel::tabulated(std::vector<double> x, std::vector<double> s,
                                         std::vector<double> s_dot, double sigma) {
  if (x.size() < 2 || s.size() != x.size() || s_dot.size() != x.size()) {
    throw InvalidInput("tabulated: need at least two (x, S, S') triples of equal length");
  }
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) throw InvalidInput("tabulated: x must increase strictly");
  }
  struct Table {
    std::vector<double> x, s, d;
  };
  auto t = std::make_shared<const Table>(Table{std::move(x), std::move(s), std::move(s_dot)});
  // Returns (S, S') by cubic Hermite interpolation, linear outside the table.
  auto eval = [t](double z) -> std::pair<double, double> {
    const auto& tb = *t;
    if (z <= tb.x.front()) return {tb.s.front() + tb.d.front() * (z - tb.x.front()), tb.d.front()};
    if (z >= tb.x.back()) return {tb.s.back() + tb.d.back() * (z - tb.x.back()), tb.d.back()};
    const std::size_t i = std::upper_bound(tb.x.begin(), tb.x.end(), z) - tb.x.begin() - 1;
    const double h = tb.x[i + 1] - tb.x[i];
    const double u = (z - tb.x[i]) / h;
    const double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
    const double h10 = u * (1 - u) * (1 - u);
    const double h01 = u * u * (3 - 2 * u);
    const double h11 = u * u * (u - 1);
    const double val = h00 * tb.s[i] + h10 * h * tb.d[i] + h01 * tb.s[i + 1] + h11 * h * tb.d[i + 1];
    const double d00 = 6 * u * u - 6 * u;
    const double d10 = 3 * u * u - 4 * u + 1;
    const double d01 = -d00;
    const double d11 = 3 * u * u - 2 * u;
    const double der = (d00 * tb.s[i] + d01 * tb.s[i + 1]) / h + d10 * tb.d[i] + d11 * tb.d[i + 1];
    return {val, der};
  };
  DiffusionModel m;
  m.drift = [eval](double z) { return eval(z).first; };
  m.drift_derivative = [eval](double z) { return eval(z).second; };
  // The Hermite derivative on a cell is a quadratic; bound it by its values at the ends
  // and the vertex.
  double bound = 0.0;
  for (std::size_t i = 0; i + 1 < t->x.size(); ++i) {
    const double a = t->x[i];
    const double h = t->x[i + 1] - a;
    for (double u : {0.0, 0.25, 0.5, 0.75, 1.0}) bound = std::max(bound, std::fabs(eval(a + u * h).second));
    // Vertex of the quadratic derivative in u.
    const double c2 = 6 * (t->s[i] - t->s[i + 1]) / h + 3 * (t->d[i] + t->d[i + 1]);
    const double c1 = -6 * (t->s[i] - t->s[i + 1]) / h - 4 * t->d[i] - 2 * t->d[i + 1];
    if (c2 != 0.0) {
      const double uv = -c1 / (2 * c2);
      if (uv > 0.0 && uv < 1.0) bound = std::max(bound, std::fabs(eval(a + uv * h).second));
    }
  }
  m.s_deriv_compact_bound = bound;
  m.set_constant_sigma(sigma);
  return m;
}

void DiffusionModel::set_constant_sigma(double value) {
  if (!(value > 0.0) || !std::isfinite(value)) throw InvalidInput("sigma must be finite and > 0");
  sigma = [value](double) { return value; };
  sigma_derivative = [](double) { return 0.0; };
  sigma0 = value;
  sigma1 = value;
  constant_sigma = true;
}

void DiffusionModel::set_tanh_sigma(double base, double amplitude) {
  if (!(base > 0.0) || !(std::fabs(amplitude) < base)) {
    throw InvalidInput("tanh sigma: need base > |amplitude|");
  }
  sigma = [base, amplitude](double x) { return base + amplitude * std::tanh(x); };
  sigma_derivative = [amplitude](double x) {
    const double t = std::tanh(x);
    return amplitude * (1.0 - t * t);
  };
  sigma0 = base - std::fabs(amplitude);
  sigma1 = base + std::fabs(amplitude);
  constant_sigma = amplitude == 0.0;
}

double lyapunov_v(double x, double eps) { return std::pow(1.0 + x * x, eps); }

double lyapunov_v1(double x, double eps) {
  return 2.0 * eps * x * std::pow(1.0 + x * x, eps - 1.0);
}

double lyapunov_v2(double x, double eps) {
  const double q = 1.0 + x * x;
  return 2.0 * eps * std::pow(q, eps - 1.0) + 4.0 * eps * (eps - 1.0) * x * x * std::pow(q, eps - 2.0);
}

LyapunovParams lyapunov_params(const DriftClassParams& cls, double sigma1) {
  cls.validate();
  if (!(sigma1 > 0.0) || !std::isfinite(sigma1)) throw InvalidInput("lyapunov: sigma1 must be > 0");
  const double m = cls.m_bound, a = cls.a_radius, l = cls.l_param, eps = cls.epsilon;
  LyapunovParams out;
  out.gamma = eps / (2.0 * l);
  out.x_star = std::max(2.0 * l * (m + a * l), std::sqrt(1.0 + 2.0 * l * sigma1 * sigma1));
  const double drift_cap = m + l * out.x_star;  // |S| <= M + L x* on |x| <= x*
  const double s2 = sigma1 * sigma1;
  auto phi = [&](double x) {
    return std::fabs(lyapunov_v1(x, eps)) * drift_cap +
           s2 * std::max(lyapunov_v2(x, eps), 0.0) / 2.0 + out.gamma * lyapunov_v(x, eps);
  };
  // phi is even: search [0, x*] on a grid, then refine around the best node.
  const int n = 20000;
  const double h = out.x_star / n;
  int best = 0;
  double best_val = phi(0.0);
  for (int i = 1; i <= n; ++i) {
    const double val = phi(i * h);
    if (val > best_val) {
      best_val = val;
      best = i;
    }
  }
  const double lo = std::max(0.0, (best - 1) * h);
  const double hi = std::min(out.x_star, (best + 1) * h);
  const auto refined =
      boost::math::tools::brent_find_minima([&](double x) { return -phi(x); }, lo, hi, 50);
  out.beta = best_val;
  out.beta_at = best * h;
  if (-refined.second > best_val) {
    out.beta = -refined.second;
    out.beta_at = refined.first;
  }
  return out;
}

std::vector<std::string> class_violations(const DiffusionModel& model, const DriftClassParams& cls,
                                          double x_max, long points) {
  cls.validate();
  std::vector<std::string> out;
  if (!model.drift || !model.drift_derivative || !model.sigma) {
    out.push_back("model is missing drift, drift derivative or sigma");
    return out;
  }
  if (!(model.sigma0 > 0.0) || !(model.sigma1 >= model.sigma0)) {
    out.push_back("need 0 < sigma0 <= sigma1");
  }
  const double tol = 1e-12;
  double worst_m = 0.0, worst_m_x = 0.0;
  double worst_lo = 0.0, worst_lo_x = 0.0;  // S' below -L
  double worst_hi = 0.0, worst_hi_x = 0.0;  // S' above -1/L
  double worst_s = 0.0, worst_s_x = 0.0;
  for (long i = 0; i < points; ++i) {
    const double x = -x_max + 2.0 * x_max * static_cast<double>(i) / static_cast<double>(points - 1);
    const double s = model.sigma(x);
    const double sv = std::max(model.sigma0 - s, s - model.sigma1);
    if (sv > tol * model.sigma1 && sv > worst_s) {
      worst_s = sv;
      worst_s_x = x;
    }
    if (std::fabs(x) <= cls.a_radius) {
      const double excess = std::fabs(model.drift(x)) - cls.m_bound;
      if (excess > tol * cls.m_bound && excess > worst_m) {
        worst_m = excess;
        worst_m_x = x;
      }
    }
    if (std::fabs(x) >= cls.a_radius) {
      const double d = model.drift_derivative(x);
      if (-cls.l_param - d > tol && -cls.l_param - d > worst_lo) {
        worst_lo = -cls.l_param - d;
        worst_lo_x = x;
      }
      if (d + 1.0 / cls.l_param > tol && d + 1.0 / cls.l_param > worst_hi) {
        worst_hi = d + 1.0 / cls.l_param;
        worst_hi_x = x;
      }
    }
  }
  if (worst_s > 0.0) out.push_back("sigma outside [sigma0, sigma1] at x = " + num(worst_s_x));
  if (worst_m > 0.0) out.push_back("|S| exceeds M on |x| <= a at x = " + num(worst_m_x));
  if (worst_lo > 0.0) out.push_back("S' < -L beyond a at x = " + num(worst_lo_x));
  if (worst_hi > 0.0) out.push_back("S' > -1/L beyond a at x = " + num(worst_hi_x));
  return out;
}

LyapunovReport drift_check(const DiffusionModel& model, const DriftClassParams& cls, long points,
                           double tol) {
  if (points < 3) throw InvalidInput("drift_check: need at least 3 grid points");
  const LyapunovParams lp = lyapunov_params(cls, model.sigma1);
  const double x_max = 10.0 * lp.x_star;
  const auto bad = class_violations(model, cls, x_max, points);
  if (!bad.empty()) {
    std::string msg = "drift_check: model is outside the drift class:";
    for (const auto& b : bad) msg += " " + b + ";";
    throw ConditionFailure(msg);
  }
  LyapunovReport rep;
  rep.gamma = lp.gamma;
  rep.beta = lp.beta;
  rep.beta_at = lp.beta_at;
  rep.x_star = lp.x_star;
  rep.grid_points = points;
  rep.worst_margin = -std::numeric_limits<double>::infinity();
  const double eps = cls.epsilon;
  for (long i = 0; i < points; ++i) {
    const double x = -x_max + 2.0 * x_max * static_cast<double>(i) / static_cast<double>(points - 1);
    const double s = model.sigma(x);
    const double v = lyapunov_v(x, eps);
    const double gen = lyapunov_v1(x, eps) * model.drift(x) + s * s / 2.0 * lyapunov_v2(x, eps);
    const double margin = gen + rep.gamma * v - rep.beta;
    if (margin > rep.worst_margin) {
      rep.worst_margin = margin;
      rep.worst_x = x;
    }
    if (margin > tol * std::max(1.0, rep.beta + rep.gamma * v)) ++rep.grid_violations;
  }
  rep.rho = -std::expm1(-rep.gamma / 2.0);
  rep.d_const = rep.beta / rep.gamma;
  // E V(y_1) <= e^{-gamma} V + beta/gamma <= e^{-gamma/2} V once V >= threshold.
  const double threshold = rep.d_const / (std::exp(-rep.gamma) * std::expm1(rep.gamma / 2.0));
  if (threshold <= 1.0) {
    rep.k_radius = 0.0;
    rep.k_degenerate = true;
  } else {
    rep.k_radius = std::sqrt(std::pow(threshold, 1.0 / eps) - 1.0);
  }
  return rep;
}

double brownian_max_prob(double k) {
  if (!(k > 0.0)) return 0.0;
  if (!std::isfinite(k)) return 1.0;
  double sum = 0.0;
  if (k < 1.5) {
    // Spectral series over odd n.
    for (int n = 1;; n += 2) {
      const double sign = ((n - 1) / 2) % 2 == 0 ? 1.0 : -1.0;
      const double term = 4.0 / kPi * sign / n * std::exp(-n * n * kPi * kPi / (8.0 * k * k));
      sum += term;
      if (std::fabs(term) < 1e-12) break;
    }
  } else {
    // Method of images.
    sum = std_normal_cdf(k) - std_normal_cdf(-k);
    for (int j = 1;; ++j) {
      const double sign = j % 2 == 0 ? 1.0 : -1.0;
      const double term = 2.0 * sign * (std_normal_cdf((2 * j + 1) * k) - std_normal_cdf((2 * j - 1) * k));
      sum += term;
      if (std::fabs(term) < 1e-17) break;
    }
  }
  return std::clamp(sum, 0.0, 1.0);
}

double lamperti(const DiffusionModel& model, double x) {
  if (model.constant_sigma) return x / model.sigma0;
  return integrate([&](double u) { return 1.0 / model.sigma(u); }, 0.0, x);
}

double lamperti_inverse(const DiffusionModel& model, double z) {
  if (model.constant_sigma) return z * model.sigma0;
  if (z == 0.0) return 0.0;
  // |f(x)| lies between |x|/sigma1 and |x|/sigma0.
  double lo = z * model.sigma0, hi = z * model.sigma1;
  if (lo > hi) std::swap(lo, hi);
  auto fn = [&](double x) { return lamperti(model, x) - z; };
  boost::math::tools::eps_tolerance<double> stop(50);
  const auto r = boost::math::tools::bisect(fn, lo, hi, stop);
  return (r.first + r.second) / 2.0;
}

namespace {

double s_tilde(const DiffusionModel& model, double z) {
  const double x = lamperti_inverse(model, z);
  return model.drift(x) / model.sigma(x) - model.sigma_derivative(x) / 2.0;
}

}  // namespace

double MinorizationReport::nu_density(const DiffusionModel& model, double y) const {
  if (y < c_lo || y > c_hi) return 0.0;
  const double f = lamperti(model, y);
  return std::exp(-f * f / 2.0) / v3;
}

MinorizationReport minorization_params(double k_radius, const DiffusionModel& model) {
  if (!(k_radius > 0.0) || !std::isfinite(k_radius)) {
    throw InvalidInput("minorization: K must be finite and > 0, got " + num(k_radius));
  }
  const double bound = model.s_deriv_compact_bound;
  if (!std::isfinite(bound) || bound < 0.0) {
    throw InvalidInput(
        "minorization: v2 is not finite; supply s_deriv_compact_bound, a bound on |dS~/dz| over "
        "|z| <= 3k");
  }
  MinorizationReport rep;
  rep.k_radius = k_radius;
  rep.k_f = std::max(lamperti(model, k_radius), -lamperti(model, -k_radius));
  const double k = rep.k_f;
  rep.c_lo = lamperti_inverse(model, -k);
  rep.c_hi = lamperti_inverse(model, k);
  rep.v1 = brownian_max_prob(k);

  // sup |S~| over |z| <= 3k: grid maximum plus the Lipschitz gap between nodes.
  const int n = 20000;
  const double h = 6.0 * k / n;
  double sup = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double z = -3.0 * k + i * h;
    sup = std::max(sup, std::fabs(s_tilde(model, z)));
    if (model.constant_sigma) {
      const double d = std::fabs(model.drift_derivative(z * model.sigma0));
      if (d > bound * (1.0 + 1e-12)) {
        throw InvalidInput("minorization: s_deriv_compact_bound " + num(bound) +
                           " is below |S'| = " + num(d) + " at x = " + num(z * model.sigma0));
      }
    }
  }
  rep.s_tilde_sup = sup + bound * h / 2.0;
  auto abs_st = [&](double z) { return std::fabs(s_tilde(model, z)); };
  const double int_abs = integrate(abs_st, -k, 0.0, 1e-12) + integrate(abs_st, 0.0, k, 1e-12);
  rep.v2 = 0.5 * (bound + rep.s_tilde_sup * rep.s_tilde_sup) + int_abs + 1.5 * k * k;
  if (!std::isfinite(rep.v2)) {
    throw InvalidInput("minorization: v2 is not finite; tighten s_deriv_compact_bound");
  }
  if (model.constant_sigma) {
    rep.v3 = model.sigma0 * std::sqrt(2.0 * kPi) * (2.0 * std_normal_cdf(k) - 1.0);
  } else {
    rep.v3 = integrate(
        [&](double y) {
          const double f = lamperti(model, y);
          return std::exp(-f * f / 2.0);
        },
        rep.c_lo, rep.c_hi, 1e-13);
  }
  const double log_delta = std::log(rep.v1) + std::log(rep.v3) - rep.v2 -
                           std::log(std::sqrt(2.0 * kPi) * model.sigma1);
  rep.delta_k = Magnitude::from_log(XReal(log_delta));
  rep.delta = rep.delta_k / Magnitude(2.0);
  while (!(rep.delta < Magnitude(0.5))) {
    rep.delta = rep.delta / Magnitude(2.0);
    rep.notes.push_back("delta rescaled by 1/2 to lie below 1/2");
  }
  rep.notes.push_back(
      "delta_k is uniform only over drifts sharing s_deriv_compact_bound = " + num(bound));
  if (std::fabs(rep.c_lo + k_radius) > 1e-12 * k_radius ||
      std::fabs(rep.c_hi - k_radius) > 1e-12 * k_radius) {
    rep.notes.push_back("C = [" + num(rep.c_lo) + ", " + num(rep.c_hi) + "] differs from [-K, K]");
  }
  return rep;
}

InvariantDensity::InvariantDensity(const DiffusionModel& model, const DriftClassParams& cls,
                                   double tol)
    : model_(model) {
  cls.validate();
  const double l = cls.l_param;
  const double s0 = model.sigma0, s1 = model.sigma1;
  x_cut_ = std::max({4.0, 2.0 * cls.a_radius, 4.0 * s1 * std::sqrt(l)});
  for (;;) {
    if (x_cut_ > 1e4) throw TruncationError("invariant_density: x_cut exceeded 1e4");
    // The tail bound needs S <= 0 from x_cut onwards (and S >= 0 below -x_cut).
    if (model.drift(x_cut_) > 0.0 || model.drift(-x_cut_) < 0.0) {
      x_cut_ *= 1.5;
      continue;
    }
    const int half = 1000;
    step_ = x_cut_ / half;
    nodes_.assign(2 * half + 1, 0.0);
    for (int i = 0; i <= 2 * half; ++i) nodes_[i] = -x_cut_ + i * step_;
    nodes_[half] = 0.0;
    h_.assign(nodes_.size(), 0.0);
    auto integrand = [&](double u) {
      const double s = model.sigma(u);
      return 2.0 * model.drift(u) / (s * s);
    };
    for (int i = half + 1; i <= 2 * half; ++i) {
      h_[i] = h_[i - 1] + integrate(integrand, nodes_[i - 1], nodes_[i], 1e-13, 4);
    }
    for (int i = half - 1; i >= 0; --i) {
      h_[i] = h_[i + 1] - integrate(integrand, nodes_[i], nodes_[i + 1], 1e-13, 4);
    }
    shift_ = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes_.size(); ++i) shift_ = std::max(shift_, log_unnormalized(nodes_[i]));
    mass_.assign(nodes_.size(), 0.0);
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
      mass_[i] = mass_[i - 1] + integrate([&](double x) { return std::exp(log_unnormalized(x) - shift_); },
                                          nodes_[i - 1], nodes_[i], 1e-13, 3);
    }
    const double z = mass_.back();
    // Beyond x_cut, S' <= -1/L and S <= 0 give 2 int S/sigma^2 <= -(x - x_cut)^2 / (L sigma1^2).
    const double gauss = std::sqrt(kPi * l * s1 * s1) / 2.0 / (s0 * s0);
    const double tail_mass =
        gauss * (std::exp(h_.back() - shift_) + std::exp(h_.front() - shift_));
    tail_ = tail_mass / z;
    log_z_ = std::log(z) + shift_;
    for (double& m : mass_) m /= z;
    if (tail_ <= tol) break;
    x_cut_ *= 1.5;
  }
}

double InvariantDensity::h_at(double x) const {
  const double pos = (x + x_cut_) / step_;
  const long last = static_cast<long>(nodes_.size()) - 1;
  const long i = std::clamp(static_cast<long>(std::lround(pos)), 0L, last);
  auto integrand = [&](double u) {
    const double s = model_.sigma(u);
    return 2.0 * model_.drift(u) / (s * s);
  };
  if (i > 0 && i < last) return h_[i] + panel(integrand, nodes_[i], x);
  return h_[i] + integrate(integrand, nodes_[i], x, 1e-13, 6);
}

double InvariantDensity::log_unnormalized(double x) const {
  const double s = model_.sigma(x);
  return h_at(x) - 2.0 * std::log(s);
}

double InvariantDensity::density(double x) const { return std::exp(log_unnormalized(x) - log_z_); }

double InvariantDensity::cdf(double x) const {
  if (x <= -x_cut_) return 0.0;
  if (x >= x_cut_) return 1.0;
  const long i = std::clamp(static_cast<long>(std::floor((x + x_cut_) / step_)), 0L,
                            static_cast<long>(nodes_.size()) - 2);
  const double part = integrate([&](double u) { return density(u); }, nodes_[i], x, 1e-13, 3);
  return std::clamp(mass_[i] + part, 0.0, 1.0);
}

double InvariantDensity::expectation(const RealFn& g) const {
  double sum = 0.0;
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    sum += integrate([&](double x) { return g(x) * density(x); }, nodes_[i - 1], nodes_[i], 1e-13, 3);
  }
  return sum;
}

namespace {

long steps_per_unit(double dt) {
  if (!(dt > 0.0) || dt > 1e-2 * (1.0 + 1e-12)) {
    throw InvalidInput("euler: dt must lie in (0, 1e-2], got " + num(dt));
  }
  return std::lround(1.0 / dt);
}

// Writes floor(t_end) + 1 skeleton values to out and returns y(t_end).
double simulate_path(const DiffusionModel& model, double x0, long spu, long n_steps, Rng& rng,
                     double* out) {
  const double h = 1.0 / static_cast<double>(spu);
  const double sq = std::sqrt(h);
  double y = x0;
  std::size_t k = 0;
  out[k++] = y;
  for (long step = 1; step <= n_steps; ++step) {
    y += model.drift(y) * h + model.sigma(y) * sq * rng.normal();
    if (!(std::fabs(y) <= kBlowUp)) {
      throw ConditionFailure("euler: |y| exceeded 1e10 at t = " + num(step * h) +
                             "; the drift is likely outside the class");
    }
    if (step % spu == 0) out[k++] = y;
  }
  return y;
}

}  // namespace

SkeletonPath euler_simulate(const DiffusionModel& model, double x0, double t_end, double dt,
                            std::uint64_t seed) {
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw InvalidInput("euler: t_end must be >= 0");
  const long spu = steps_per_unit(dt);
  const long n_steps = std::lround(t_end * static_cast<double>(spu));
  SkeletonPath p;
  p.skeleton.assign(static_cast<std::size_t>(n_steps / spu) + 1, 0.0);
  Rng rng = Rng::substream(seed, 0);
  p.y_end = simulate_path(model, x0, spu, n_steps, rng, p.skeleton.data());
  return p;
}

Ensemble euler_ensemble(const DiffusionModel& model, double x0, double t_end, double dt,
                        std::size_t n_paths, std::uint64_t seed) {
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw InvalidInput("euler: t_end must be >= 0");
  const long spu = steps_per_unit(dt);
  const long n_steps = std::lround(t_end * static_cast<double>(spu));
  Ensemble e;
  e.n_paths = n_paths;
  e.n_times = static_cast<std::size_t>(n_steps / spu) + 1;
  e.values.assign(n_paths * e.n_times, 0.0);
  parallel_for(n_paths, [&](std::size_t i) {
    Rng rng = Rng::substream(seed, i);
    simulate_path(model, x0, spu, n_steps, rng, e.values.data() + i * e.n_times);
  });
  return e;
}

XReal DiffusionCertificate::log_bound(double t, double x) const {
  return cert.log_bound(std::floor(t), lyapunov_v(x, epsilon));
}

DiffusionCertificate certify_diffusion(const DriftClassParams& cls, const DiffusionModel& model) {
  DiffusionCertificate out;
  out.epsilon = cls.epsilon;
  out.lyapunov = drift_check(model, cls);
  const auto& ly = out.lyapunov;
  if (!ly.passed()) {
    throw ConditionFailure("certify_diffusion: drift check found " +
                           std::to_string(ly.grid_violations) + " grid violations, worst at x = " +
                           num(ly.worst_x) + " with margin " + num(ly.worst_margin));
  }
  if (ly.k_degenerate) {
    throw ConditionFailure("certify_diffusion: K = 0, the small set degenerates to a point");
  }
  out.minorization = minorization_params(ly.k_radius, model);
  const double reach = std::max(std::fabs(out.minorization.c_lo), std::fabs(out.minorization.c_hi));
  out.v_star = lyapunov_v(reach, cls.epsilon);
  out.cert = certificate_assemble({ly.rho, ly.d_const, out.v_star},
                                  MinorizationParams(out.minorization.delta));
  return out;
}

double smooth_bump(double x) {
  return 1.0 / ((1.0 + std::exp(-8.0 * (x + 0.5))) * (1.0 + std::exp(8.0 * (x - 1.0))));
}

std::vector<EmpiricalRow> empirical_domination(const DiffusionCertificate& dc,
                                               const DiffusionModel& model,
                                               const InvariantDensity& inv, const RealFn& g,
                                               const std::vector<double>& x0s, long t_max,
                                               std::size_t n_paths, double dt, std::uint64_t seed) {
  if (t_max < 1) throw InvalidInput("empirical_domination: t_max must be >= 1");
  if (n_paths < 2) throw InvalidInput("empirical_domination: need at least two paths");
  const double pi_g = inv.expectation(g);
  std::vector<EmpiricalRow> rows;
  for (std::size_t s = 0; s < x0s.size(); ++s) {
    const double x0 = x0s[s];
    const Ensemble ens =
        euler_ensemble(model, x0, static_cast<double>(t_max), dt, n_paths, seed + s);
    for (long t = 1; t <= t_max; ++t) {
      // Neumaier-compensated mean and second moment about the mean.
      double sum = 0.0, comp = 0.0;
      for (std::size_t p = 0; p < n_paths; ++p) {
        const double v = g(ens.at(p, static_cast<std::size_t>(t)));
        const double next = sum + v;
        comp += std::fabs(sum) >= std::fabs(v) ? (sum - next) + v : (v - next) + sum;
        sum = next;
      }
      const double mean = (sum + comp) / static_cast<double>(n_paths);
      double ss = 0.0;
      for (std::size_t p = 0; p < n_paths; ++p) {
        const double d = g(ens.at(p, static_cast<std::size_t>(t))) - mean;
        ss += d * d;
      }
      EmpiricalRow row;
      row.x0 = x0;
      row.t = t;
      row.mc_mean = mean;
      row.mc_stderr = std::sqrt(ss / static_cast<double>(n_paths - 1) / static_cast<double>(n_paths));
      row.pi_g = pi_g;
      row.log_bound = dc.log_bound(static_cast<double>(t), x0);
      const double excess = std::fabs(mean - pi_g) - 3.0 * row.mc_stderr;
      row.dominated = excess <= 0.0 || XReal(std::log(excess)) <= row.log_bound;
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace ergocert
