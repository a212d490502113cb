#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ergocert/finite_chain.hpp"
#include "ergocert/magnitude.hpp"
#include "ergocert/renewal.hpp"

namespace ergocert {

/// Drift condition: PV <= (1 - rho) V + D 1_C, with v_star = sup_C V.
struct DriftParams {
  double rho = 0.0;
  double d_const = 0.0;
  double v_star = 1.0;
  void validate() const;
};

/// Minorization: P(x, .) >= 2 delta nu on C, 0 < delta < 1/2. Delta is held as a
/// Magnitude so that constants far below the double range (diffusions) pass through.
struct MinorizationParams {
  Magnitude delta{0.25};
  MinorizationParams() = default;
  MinorizationParams(double d);  // NOLINT(google-explicit-constructor)
  explicit MinorizationParams(const Magnitude& d) : delta(d) {}
  void validate() const;
};

/// D1(r) = ((1-rho) e^r + D e^r) / (1 - (1-rho) e^r) for 0 < r < -ln(1-rho).
double uc_bound(double rho, double d_const, double r);

/// (1 - varsigma)^{n-1}.
double taboo_bound(double varsigma, long n);

struct UbBound {
  double iota0 = 0.0;
  double gamma = 0.0;
  double d1_star = 0.0;
};

/// iota0 = -(r/2) ln(1-varsigma) / ln(D* V*), gamma = min(r, iota0),
/// D1* = D* (1 + D* V* / (1 - (1-varsigma)^{1/4})).
UbBound ub_bound(double d_star, double v_star, double varsigma, double r);

struct UbBoundExt {
  Magnitude iota0;
  Magnitude gamma;
  Magnitude d1_star;
};

/// ub_bound over extended-range inputs.
UbBoundExt ub_bound(const Magnitude& d_star, const Magnitude& v_star, const Magnitude& varsigma,
                    const Magnitude& r);

struct LedgerEntry {
  std::string name;
  Magnitude value;
  std::string citation;
};

struct Certificate {
  Magnitude kappa;
  Magnitude r_big;
  std::vector<LedgerEntry> ledger;
  /// Direction of every substituted bound; each one lowers kappa or raises R.
  std::vector<std::string> audit;
  CouplingConstants renewal;

  const LedgerEntry& entry(const std::string& name) const;
  /// ln(R e^{-kappa n} v_x).
  XReal log_bound(double n, double v_x) const;
  /// deviation <= R e^{-kappa n} v_x, compared in log space.
  bool dominates(double deviation, double n, double v_x) const;
};

/// Runs the ten-step assembly. Errors from any step are rethrown with the step
/// number; an exponent overflow reports the certificate as vacuous at this precision.
Certificate certificate_assemble(const DriftParams& drift, const MinorizationParams& minor);

struct H1H2 {
  DriftParams drift;
  MinorizationParams minor;
  Eigen::VectorXd nu;
};

/// Extracts uniform drift and minorization constants from a finite family.
/// When C is the whole space rho is fixed to 1/2; D is clipped below at 1e-12.
H1H2 verify_h1_h2(const std::vector<FiniteChain>& family, const Eigen::VectorXd& v,
                  const std::vector<int>& c_set);

/// Exact U_C(x, r, f) = E_x sum_{j=1}^{tau_C} e^{rj} f(X_j) for every x.
/// Throws ConditionFailure when the series diverges.
Eigen::VectorXd uc_exact(const FiniteChain& chain, const Eigen::VectorXd& f,
                         const std::vector<int>& c_set, double r);

}  // namespace ergocert
