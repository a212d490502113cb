#include "ergocert/chain_cert.hpp"

#include <cmath>
#include <cstdio>

#include "ergocert/error.hpp"

namespace ergocert {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class F>
auto step(int index, const char* name, F&& f) -> decltype(f()) {
  const std::string where = "step " + std::to_string(index) + " (" + name + "): ";
  try {
    return f();
  } catch (const NumericOverflow& e) {
    throw NumericOverflow(where + "certificate vacuous at this precision; " + e.what());
  } catch (const ConditionFailure& e) {
    throw ConditionFailure(where + e.what());
  } catch (const InvalidInput& e) {
    throw InvalidInput(where + e.what());
  } catch (const Error& e) {
    throw Error(where + e.what());
  }
}

}  // namespace

void DriftParams::validate() const {
  if (!(rho > 0.0 && rho < 1.0)) throw InvalidInput("drift: rho must lie in (0, 1), got " + num(rho));
  if (!(d_const > 0.0) || !std::isfinite(d_const)) throw InvalidInput("drift: D must be > 0");
  if (!(v_star >= 1.0) || !std::isfinite(v_star)) throw InvalidInput("drift: V* must be >= 1");
}

MinorizationParams::MinorizationParams(double d) {
  if (!(d > 0.0) || !std::isfinite(d)) {
    throw InvalidInput("minorization: delta must lie in (0, 1/2), got " + num(d));
  }
  delta = Magnitude(d);
}

void MinorizationParams::validate() const {
  if (!(delta < Magnitude(0.5))) {
    throw InvalidInput("minorization: delta must lie in (0, 1/2), got " + delta.to_string());
  }
}

double uc_bound(double rho, double d_const, double r) {
  const double r_max = -std::log1p(-rho);
  if (!(r > 0.0 && r < r_max)) {
    throw InvalidInput("uc_bound: r must lie in (0, -ln(1-rho)) = (0, " + num(r_max) + "), got " +
                       num(r));
  }
  const double er = std::exp(r);
  const double denom = 1.0 - (1.0 - rho) * er;
  const double v = ((1.0 - rho) * er + d_const * er) / denom;
  if (!(v > 0.0) || !std::isfinite(v)) throw NumericOverflow("uc_bound: D1 is not finite");
  return v;
}

double taboo_bound(double varsigma, long n) {
  if (!(varsigma > 0.0 && varsigma <= 1.0)) throw InvalidInput("taboo_bound: varsigma in (0, 1]");
  if (n < 1) throw InvalidInput("taboo_bound: n must be >= 1");
  if (n == 1) return 1.0;
  if (varsigma == 1.0) return 0.0;
  return std::exp(static_cast<double>(n - 1) * std::log1p(-varsigma));
}

UbBound ub_bound(double d_star, double v_star, double varsigma, double r) {
  if (!(d_star > 1.0)) throw InvalidInput("ub_bound: D* must exceed 1");
  if (!(v_star >= 1.0)) throw InvalidInput("ub_bound: V* must be >= 1");
  if (!(varsigma > 0.0 && varsigma < 1.0)) throw InvalidInput("ub_bound: varsigma in (0, 1)");
  if (!(r > 0.0)) throw InvalidInput("ub_bound: r must be > 0");
  const double log_dv = std::log(d_star * v_star);
  if (!(log_dv > 0.0)) throw InvalidInput("ub_bound: D* V* must exceed 1");
  UbBound out;
  const double nl = -std::log1p(-varsigma);
  out.iota0 = r / 2.0 * nl / log_dv;
  out.gamma = std::min(r, out.iota0);
  const double gap = -std::expm1(-nl / 4.0);  // 1 - (1 - varsigma)^{1/4}
  out.d1_star = d_star * (1.0 + d_star * v_star / gap);
  return out;
}

UbBoundExt ub_bound(const Magnitude& d_star, const Magnitude& v_star, const Magnitude& varsigma,
                    const Magnitude& r) {
  const Magnitude one(1.0);
  if (!(d_star > one)) throw InvalidInput("ub_bound: D* must exceed 1");
  if (!(v_star >= one)) throw InvalidInput("ub_bound: V* must be >= 1");
  if (!(varsigma < one)) throw InvalidInput("ub_bound: varsigma in (0, 1)");
  const Magnitude dv = d_star * v_star;
  const Magnitude nl = neg_log1m(varsigma);
  UbBoundExt out;
  out.iota0 = r / Magnitude(2.0) * nl / log_of(dv);
  out.gamma = min(r, out.iota0);
  out.d1_star = d_star * (one + dv / one_minus_exp_neg(nl / Magnitude(4.0)));
  return out;
}

const LedgerEntry& Certificate::entry(const std::string& name) const {
  for (const auto& e : ledger) {
    if (e.name == name) return e;
  }
  throw InvalidInput("certificate has no ledger entry " + name);
}

XReal Certificate::log_bound(double n, double v_x) const {
  return r_big.log() - kappa.value() * XReal(n) + XReal(std::log(v_x));
}

bool Certificate::dominates(double deviation, double n, double v_x) const {
  if (!(deviation > 0.0)) return true;
  return XReal(std::log(deviation)) <= log_bound(n, v_x);
}

Certificate certificate_assemble(const DriftParams& drift, const MinorizationParams& minor) {
  drift.validate();
  minor.validate();
  const double rho = drift.rho;
  const double d = drift.d_const;
  const double v_star = drift.v_star;
  const Magnitude delta = minor.delta;
  const Magnitude one(1.0);
  Certificate cert;
  auto put = [&](const std::string& name, const Magnitude& v, const std::string& citation) {
    cert.ledger.push_back({name, v, citation});
  };

  // (1)-(5): return-time bounds for the split chain, all within double range.
  const double r = step(1, "r", [&] { return -std::log1p(-rho) / 2.0; });
  put("r", Magnitude(r), "r = -ln(1 - rho) / 2");
  const double d1 = step(2, "D1", [&] { return uc_bound(rho, d, r); });
  put("D1", Magnitude(d1), "D1(r) = ((1-rho) e^r + D e^r) / (1 - (1-rho) e^r)");
  const Magnitude one_minus_delta = one - delta;
  const Magnitude d_check = step(3, "D_check", [&] {
    return Magnitude(v_star) * Magnitude(d1) / (delta * one_minus_delta);
  });
  put("D_check", d_check, "D_check = V* D1(r) / (delta (1 - delta))");
  const Magnitude vs_split = delta * delta / one_minus_delta;
  put("varsigma_split", vs_split, "varsigma* = delta^2 / (1 - delta)");
  const Magnitude d_star = one + d_check;
  put("D_star", d_star, "D* = 1 + D_check");
  const UbBoundExt ub =
      step(5, "D2", [&] { return ub_bound(d_star, Magnitude(v_star), vs_split, Magnitude(r)); });
  put("iota0", ub.iota0, "iota0 = -(r/2) ln(1 - varsigma*) / ln(D* V*)");
  put("gamma", ub.gamma, "gamma = min(r, iota0)");
  put("D2", ub.d1_star, "D2 = D* (1 + D* V* / (1 - (1 - varsigma*)^{1/4}))");

  // (6): renewal inputs at the atom.
  const Magnitude moment = ub.d1_star * Magnitude(v_star);
  put("moment_bound", moment, "E_alpha e^{gamma tau_alpha} <= D2 V*");
  const Magnitude g = ub.gamma;
  const Magnitude upsilon_chain = step(6, "upsilon_chain", [&] {
    return log_of(Magnitude(1.0) + moment / one_minus_exp_neg(g));
  });
  put("upsilon_chain", upsilon_chain, "upsilon* = ln(1 + e^gamma / (e^gamma - 1) D2 V*)");
  cert.audit = {
      "moment_bound: an upper bound replaces E e^{gamma tau}; upsilon*, A*, l* increase",
      "varsigma_renewal: delta^{l*+2} is a lower bound on a(0) p(1)^2 p_min(l*); iota*, gamma1 "
      "decrease",
      "kappa = kappa_renewal / 2 and Delta* = M*: both sides of e^{2 kappa n} Delta(n) <= M*",
      "V_atom: V on the atom is bounded by V*",
  };

  // (7): coupling constants at rate gamma with a = delta_0. The atom return law has
  // p(1) = delta and p(j) >= delta^j (each C0 -> C1 step has probability >= delta^2/(1-delta)),
  // so a(0) p(1)^2 p_min(l*) >= delta^{l*+2}.
  const Magnitude log_inv_delta = Magnitude::from_value(-delta.log());
  cert.renewal = step(7, "renewal", [&] {
    return coupling_pipeline(g, upsilon_chain, [&](const Magnitude& l_star) {
      return Magnitude::from_log(-((l_star + Magnitude(2.0)) * log_inv_delta).value());
    });
  });
  for (const auto& e : cert.renewal.entries()) {
    std::string citation = e.formula;
    if (e.name == "varsigma_star") citation = "varsigma* = delta^{l*+2}";
    put("renewal." + e.name, e.value, citation);
  }

  // (8)-(10).
  const Magnitude two(2.0);
  cert.kappa = step(8, "kappa", [&] { return cert.renewal.kappa / two; });
  put("kappa", cert.kappa, "kappa = kappa_renewal / 2");
  const Magnitude delta_star = cert.renewal.m_star;
  put("Delta_star", delta_star, "Delta* = M*");
  const Magnitude d2 = ub.d1_star;
  const Magnitude d3 = step(9, "D3", [&] { return two * moment / one_minus_exp_neg(g / two); });
  put("D3", d3, "D3 = 2 D2 V* e^{gamma/2} / (e^{gamma/2} - 1)");
  const Magnitude varrho = step(9, "varrho_star", [&] {
    return d2 / one_minus_exp_neg(cert.kappa) * delta_star * moment +
           (Magnitude(1.0) + d2) * moment + d3;
  });
  put("varrho_star",
      varrho, "varrho* = D2 e^kappa/(e^kappa - 1) Delta* D2 V* + (1 + D2) D2 V* + D3");
  put("V_atom", Magnitude(v_star), "V(atom) <= V*");
  cert.r_big = step(10, "R", [&] {
    return Magnitude(1.0) + exp_of(cert.kappa) * Magnitude(1.0 + d) + two * varrho;
  });
  put("R", cert.r_big, "R = 1 + e^kappa (1 + D) + 2 varrho*");
  return cert;
}

H1H2 verify_h1_h2(const std::vector<FiniteChain>& family, const Eigen::VectorXd& v,
                  const std::vector<int>& c_set) {
  if (family.empty()) throw InvalidInput("verify_h1_h2: empty family");
  const int n = family.front().n_states();
  for (const auto& ch : family) {
    if (ch.n_states() != n) throw InvalidInput("verify_h1_h2: chains differ in dimension");
  }
  if (v.size() != n) throw InvalidInput("verify_h1_h2: V has the wrong length");
  for (int i = 0; i < n; ++i) {
    if (!(v(i) >= 1.0) || !std::isfinite(v(i))) {
      throw InvalidInput("verify_h1_h2: V(" + std::to_string(i) + ") must be finite and >= 1");
    }
  }
  if (c_set.empty()) throw InvalidInput("verify_h1_h2: C is empty");
  const auto in_c = membership(n, c_set, "verify_h1_h2");

  H1H2 out;
  double worst_ratio = -1.0;
  for (const auto& ch : family) {
    const Eigen::VectorXd pv = ch.transition * v;
    for (int x = 0; x < n; ++x) {
      if (!in_c[x]) worst_ratio = std::max(worst_ratio, pv(x) / v(x));
    }
  }
  out.drift.rho = worst_ratio < 0.0 ? 0.5 : 1.0 - worst_ratio;
  if (!(out.drift.rho > 0.0)) {
    throw ConditionFailure("verify_h1_h2: no drift outside C (max PV/V = " + num(worst_ratio) +
                           "); enlarge C or change V");
  }
  double d = 0.0;
  double v_star = 1.0;
  for (const auto& ch : family) {
    const Eigen::VectorXd pv = ch.transition * v;
    for (int x : c_set) d = std::max(d, pv(x) - (1.0 - out.drift.rho) * v(x));
  }
  for (int x : c_set) v_star = std::max(v_star, v(x));
  out.drift.d_const = std::max(d, 1e-12);
  out.drift.v_star = v_star;

  Eigen::VectorXd m = Eigen::VectorXd::Zero(n);
  for (int y : c_set) {
    double lo = 1.0;
    for (const auto& ch : family) {
      for (int x : c_set) lo = std::min(lo, ch.transition(x, y));
    }
    m(y) = lo;
  }
  const double mass = m.sum();
  if (!(mass > 0.0)) {
    throw ConditionFailure("verify_h1_h2: the family minimum vanishes on C; no minorization");
  }
  out.minor.delta = Magnitude(mass / 2.0);
  if (!(mass / 2.0 < 0.5)) {
    throw ConditionFailure("verify_h1_h2: delta = " + num(mass / 2.0) +
                           " is not below 1/2; the rows on C coincide");
  }
  out.nu = m / mass;
  return out;
}

Eigen::VectorXd uc_exact(const FiniteChain& chain, const Eigen::VectorXd& f,
                         const std::vector<int>& c_set, double r) {
  const int n = chain.n_states();
  const auto in_c = membership(n, c_set, "uc_exact");
  std::vector<int> outside;
  for (int i = 0; i < n; ++i) {
    if (!in_c[i]) outside.push_back(i);
  }
  const double er = std::exp(r);
  const Eigen::VectorXd pf = chain.transition * f;
  const auto m = static_cast<Eigen::Index>(outside.size());
  Eigen::VectorXd u_out = Eigen::VectorXd::Zero(m);
  if (m > 0) {
    Eigen::MatrixXd a(m, m);
    Eigen::VectorXd b(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      b(i) = er * pf(outside[i]);
      for (Eigen::Index j = 0; j < m; ++j) {
        a(i, j) = (i == j ? 1.0 : 0.0) - er * chain.transition(outside[i], outside[j]);
      }
    }
    // Divergence shows up as a spectral radius of e^r P_NN at or above 1.
    Eigen::EigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd::Identity(m, m) - a);
    if (es.eigenvalues().cwiseAbs().maxCoeff() >= 1.0) {
      throw ConditionFailure("uc_exact: the series diverges at r = " + num(r));
    }
    u_out = a.partialPivLu().solve(b);
  }
  Eigen::VectorXd full_out = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) full_out(outside[i]) = u_out(i);
  return er * (pf + chain.transition * full_out);
}

}  // namespace ergocert
