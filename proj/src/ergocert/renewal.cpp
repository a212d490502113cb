#include "ergocert/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ergocert/error.hpp"

namespace ergocert {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

template <class F>
Magnitude named(const char* name, F&& f) {
  try {
    return f();
  } catch (const NumericOverflow& e) {
    throw NumericOverflow(std::string("overflow while computing ") + name + ": " + e.what());
  }
}

}  // namespace

std::vector<double> renewal_sequence(const Pmf& p, std::size_t n_max) {
  p.require_increment("renewal_sequence");
  std::vector<double> u(n_max + 1, 0.0);
  u[0] = 1.0;
  const std::size_t lo = std::max<std::size_t>(p.offset(), 1);
  for (std::size_t n = 1; n <= n_max; ++n) {
    double s = 0.0;
    const std::size_t hi = std::min(n, p.last());
    for (std::size_t k = lo; k <= hi; ++k) s += p(k) * u[n - k];
    u[n] = s;
  }
  return u;
}

Pmf stationary_delay(const Pmf& p) {
  p.require_increment("stationary_delay");
  const double m = p.mean();
  if (!(m > 0.0) || !std::isfinite(m)) throw InvalidInput("stationary_delay: mean must be finite");
  const std::size_t last = p.last();
  std::vector<double> b(last, 0.0);
  double suffix = 0.0;
  for (std::size_t j = last; j-- > 0;) {
    suffix += p(j + 1);
    b[j] = suffix / m;
  }
  return Pmf(0, std::move(b), 0.0);
}

ExpMoment exp_moment(const Pmf& f, double r) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw InvalidInput("exp_moment: rate must be >= 0");
  ExpMoment out;
  for (std::size_t i = 0; i < f.masses().size(); ++i) {
    const double w = f.masses()[i];
    if (w == 0.0) continue;
    out.stored += w * std::exp(r * static_cast<double>(f.offset() + i));
  }
  if (f.tail_mass_bound() > 0.0) {
    out.tail_correction = f.tail_mass_bound() * std::exp(r * static_cast<double>(f.end()));
  }
  if (!std::isfinite(out.total())) {
    throw NumericOverflow("exp_moment: E e^{rY} overflows at rate r = " + num(r));
  }
  return out;
}

double upsilon_star(const Pmf& p, double r) {
  if (!(r > kMinRate) || !std::isfinite(r)) {
    throw InvalidInput("upsilon_star: rate must exceed " + num(kMinRate) + ", got " + num(r));
  }
  p.require_increment("upsilon_star");
  const double moment = exp_moment(p, r).total();
  const double v = std::log1p(moment / -std::expm1(-r));
  if (!std::isfinite(v)) throw NumericOverflow("upsilon_star overflows at rate r = " + num(r));
  return v;
}

Pmf sigma1_law(const Pmf& a, const Pmf& p, std::size_t l_max) {
  if (!(a(0) > 0.0)) throw InvalidInput("sigma1_law: requires a(0) > 0");
  p.require_increment("sigma1_law");
  if (l_max == 0) throw InvalidInput("sigma1_law: l_max must be >= 1");
  const double a0 = a(0);
  const double a1 = a(1);
  const double p1 = p(1);
  std::vector<double> m(l_max);
  double total = 0.0;
  for (std::size_t l = 1; l <= l_max; ++l) {
    m[l - 1] = a0 * p(l) * p1 + a1 * p(l) + a0 * p(l + 1) + a(l + 1);
    total += m[l - 1];
  }
  return Pmf(1, std::move(m), std::max(0.0, 1.0 - total));
}

std::vector<CouplingConstants::Entry> CouplingConstants::entries() const {
  return {
      {"r", r, "exponential-moment rate r"},
      {"upsilon_star", upsilon_star, "upsilon* >= ln(E e^{rY0} + E e^{rY0'} + E e^{rY1})"},
      {"r1", r1, "r1 = r^2 / (2 upsilon*)"},
      {"rho_star", rho_star, "rho* = (1 - e^{-r1}) / 2"},
      {"A_star", a_star, "A* = 3 e^{upsilon* + r/2} / (1 - e^{-r/2})"},
      {"l_star", l_star, "l* = floor((2/r) ln(2 A* / (1 - e^{-r1}))) + 1"},
      {"A1_star", a1_star,
       "A1* = (sqrt(1-rho*) + (1 + A*) e^{r1 l*}) / (1 - sqrt(1-rho*))"},
      {"gamma_star", gamma_star, "gamma* = -ln(1 - rho*) / 2"},
      {"varsigma_star", varsigma_star, "varsigma* = a(0) p(1)^2 p_min(l*)"},
      {"iota_star", iota_star, "iota* = -r ln(1 - varsigma*) / (2 (ln A* + r1 l*))"},
      {"gamma1", gamma1, "gamma1 = min(gamma*, iota*)"},
      {"A2_star", a2_star,
       "A2* = A1* (1 + A1* e^{r1 l*} / (1 - (1 - varsigma*)^{1/4}))"},
      {"M_star", m_star, "M* = sqrt(3 A2* e^{upsilon*}) e^{gamma1/4} / (e^{gamma1/4} - 1)"},
      {"kappa", kappa, "kappa = gamma1 r / (2 upsilon*)"},
  };
}

CouplingConstants coupling_pipeline(const Magnitude& r, const Magnitude& upsilon,
                                    const VarsigmaFn& varsigma) {
  const Magnitude one;
  const Magnitude two(2.0);
  const Magnitude three(3.0);
  const Magnitude half(0.5);
  const Magnitude quarter(0.25);
  static const Magnitude kVarsigmaCap(1.0 - std::ldexp(1.0, -20));

  CouplingConstants c;
  c.r = r;
  c.upsilon_star = upsilon;
  c.r1 = named("r1", [&] { return r * r / (two * upsilon); });
  c.rho_star = named("rho_star", [&] { return one_minus_exp_neg(c.r1) * half; });
  c.a_star = named("A_star", [&] {
    return three * exp_of(upsilon + r * half) / one_minus_exp_neg(r * half);
  });
  c.l_star = named("l_star", [&] {
    const Magnitude arg = two * c.a_star / one_minus_exp_neg(c.r1);
    return floor_plus_one(two / r * log_of(arg));
  });
  c.gamma_star = named("gamma_star", [&] { return neg_log1m(c.rho_star) * half; });
  const Magnitude e_r1_l = named("e^{r1 l*}", [&] { return exp_of(c.r1 * c.l_star); });
  c.a1_star = named("A1_star", [&] {
    return (exp_neg(c.gamma_star) + (one + c.a_star) * e_r1_l) /
           one_minus_exp_neg(c.gamma_star);
  });
  c.varsigma_star = min(varsigma(c.l_star), kVarsigmaCap);
  const Magnitude nl_vs = neg_log1m(c.varsigma_star);
  c.iota_star = named("iota_star", [&] {
    return r * nl_vs / (two * (log_of(c.a_star) + c.r1 * c.l_star));
  });
  c.gamma1 = min(c.gamma_star, c.iota_star);
  c.a2_star = named("A2_star", [&] {
    return c.a1_star * (one + c.a1_star * e_r1_l / one_minus_exp_neg(nl_vs * quarter));
  });
  c.m_star = named("M_star", [&] {
    return sqrt(three * c.a2_star * exp_of(upsilon)) / one_minus_exp_neg(c.gamma1 * quarter);
  });
  c.kappa = named("kappa", [&] { return c.gamma1 * r / (two * upsilon); });
  if (c.kappa > r * half) throw Error("coupling_pipeline: kappa exceeds r/2");
  return c;
}

CouplingConstants coupling_constants(const Pmf& a, const Pmf& p, double r, double upsilon,
                                     C1Scope scope) {
  if (!(a(0) > 0.0)) throw InvalidInput("coupling_constants: requires a(0) > 0");
  p.require_increment("coupling_constants");
  if (!(r > 0.0) || !std::isfinite(r)) throw InvalidInput("coupling_constants: r must be > 0");
  if (!(upsilon > 0.0) || !std::isfinite(upsilon)) {
    throw InvalidInput("coupling_constants: upsilon must be finite and > 0");
  }
  const double a0 = a(0);
  const double p1 = p(1);
  auto varsigma = [&](const Magnitude& l_star) {
    const double l = std::round(l_star.to_double());
    const bool finite_support = p.tail_mass_bound() == 0.0;
    double upto = l;
    if (finite_support && scope == C1Scope::reachable) {
      upto = std::min(l, static_cast<double>(p.last()));
    } else if (l > static_cast<double>(p.last())) {
      if (finite_support) {
        throw ConditionFailure("condition C1 fails: p(" + std::to_string(p.last() + 1) +
                               ") = 0 with l* = " + l_star.to_string());
      }
      throw ConditionFailure("condition C1 cannot be checked: l* = " + l_star.to_string() +
                             " exceeds the stored support (last index " +
                             std::to_string(p.last()) + ")");
    }
    double pmin = 1.0;
    const auto hi = static_cast<std::size_t>(upto);
    for (std::size_t k = 1; k <= hi; ++k) {
      if (!(p(k) > 0.0)) {
        throw ConditionFailure("condition C1 fails: p(" + std::to_string(k) +
                               ") = 0 with l* = " + l_star.to_string());
      }
      pmin = std::min(pmin, p(k));
    }
    return Magnitude(a0) * Magnitude(p1) * Magnitude(p1) * Magnitude(pmin);
  };
  if (!(p1 > 0.0)) throw ConditionFailure("condition C1 fails: p(1) = 0");
  return coupling_pipeline(Magnitude(r), Magnitude(upsilon), varsigma);
}

double KendallBound::log_bound(double n) const {
  return (m_star.log() - kappa.value() * XReal(n)).to_double();
}

bool KendallBound::dominates(double deviation, double n) const {
  if (!(deviation > 0.0)) return true;
  return XReal(std::log(deviation)) <= m_star.log() - kappa.value() * XReal(n);
}

KendallBound kendall_bound(const Pmf& p, double r, C1Scope scope) {
  p.require_increment("kendall_bound");
  (void)stationary_delay(p);  // validates a finite mean for the stationary companion
  const double ups = upsilon_star(p, r);
  KendallBound kb;
  kb.constants = coupling_constants(Pmf::delta(0), p, r, ups, scope);
  kb.m_star = kb.constants.m_star;
  kb.kappa = kb.constants.kappa;
  return kb;
}

std::vector<double> log_grid(double r_lo, double r_hi, std::size_t n) {
  if (!(r_lo > 0.0) || !(r_hi >= r_lo) || n == 0) throw InvalidInput("log_grid: bad range");
  std::vector<double> g(n);
  if (n == 1) {
    g[0] = r_lo;
    return g;
  }
  const double step = std::log(r_hi / r_lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) g[i] = r_lo * std::exp(step * static_cast<double>(i));
  return g;
}

RateChoice best_rate(const Pmf& p, const std::vector<double>& rates) {
  RateChoice best;
  bool found = false;
  std::string last_error = "no rates supplied";
  for (double r : rates) {
    try {
      KendallBound kb = kendall_bound(p, r);
      if (!found || kb.kappa > best.bound.kappa) {
        best.r = r;
        best.bound = kb;
        found = true;
      }
    } catch (const Error& e) {
      last_error = e.what();
    }
  }
  if (!found) throw ConditionFailure("best_rate: every rate failed; last error: " + last_error);
  return best;
}

}  // namespace ergocert
