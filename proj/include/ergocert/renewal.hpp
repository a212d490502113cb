#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "ergocert/magnitude.hpp"
#include "ergocert/pmf.hpp"

namespace ergocert {

/// u(0..n_max) from u(0) = 1, u(n) = sum_{k=1}^{n} p(k) u(n-k).
std::vector<double> renewal_sequence(const Pmf& p, std::size_t n_max);

/// b(j) = (1/m) sum_{i>j} p(i); requires a finite stored support (tail <= 1e-12).
Pmf stationary_delay(const Pmf& p);

struct ExpMoment {
  double stored = 0.0;           ///< sum_k e^{rk} f(k) over the stored support
  double tail_correction = 0.0;  ///< e^{r * end} * tail_mass_bound
  double total() const { return stored + tail_correction; }
};

ExpMoment exp_moment(const Pmf& f, double r);

/// Rates at or below this are rejected by upsilon_star.
inline constexpr double kMinRate = 1e-9;

/// ln(1 + e^r/(e^r - 1) * E e^{rY}), with the tail correction included in the moment.
double upsilon_star(const Pmf& p, double r);

/// Law of the first return of W to 1, for l = 1..l_max (offset 1, residual in the tail).
Pmf sigma1_law(const Pmf& a, const Pmf& p, std::size_t l_max);

/// Which indices the positivity condition on p is checked over.
enum class C1Scope {
  /// p(l) > 0 for every 1 <= l <= l*.
  through_l_star,
  /// For a finitely supported p with largest index N, only 1 <= l <= min(l*, N):
  /// the embedded chain never leaves {1..N} when the companion delay lives on {0..N-1}.
  reachable,
};

struct CouplingConstants {
  Magnitude r;
  Magnitude upsilon_star;
  Magnitude r1;
  Magnitude rho_star;
  Magnitude a_star;
  Magnitude l_star;
  Magnitude a1_star;
  Magnitude gamma_star;
  Magnitude varsigma_star;
  Magnitude iota_star;
  Magnitude gamma1;
  Magnitude a2_star;
  Magnitude m_star;
  Magnitude kappa;

  struct Entry {
    std::string name;
    Magnitude value;
    std::string formula;
  };
  /// Entries in evaluation order.
  std::vector<Entry> entries() const;
};

/// Values of varsigma* as a function of l*; returns the lower bound on a(0) p(1)^2 p_min(l*).
using VarsigmaFn = std::function<Magnitude(const Magnitude& l_star)>;

/// The full coupling ledger for a given rate r, moment bound upsilon and varsigma(l*).
/// varsigma is clamped to at most 1 - 2^-20 (a smaller lower bound stays valid).
CouplingConstants coupling_pipeline(const Magnitude& r, const Magnitude& upsilon,
                                    const VarsigmaFn& varsigma);

CouplingConstants coupling_constants(const Pmf& a, const Pmf& p, double r, double upsilon,
                                     C1Scope scope = C1Scope::through_l_star);

struct KendallBound {
  Magnitude m_star;
  Magnitude kappa;
  CouplingConstants constants;
  /// |u(n) - 1/m| <= M* e^{-kappa n}, compared in log space.
  bool dominates(double deviation, double n) const;
  /// ln(M*) - kappa n.
  double log_bound(double n) const;
};

/// a = delta_0, b = stationary_delay(p), upsilon via upsilon_star; C1 on the reachable range.
KendallBound kendall_bound(const Pmf& p, double r, C1Scope scope = C1Scope::reachable);

struct RateChoice {
  double r = 0.0;
  KendallBound bound;
};

/// Evaluates kendall_bound on the given rates and keeps the largest kappa.
/// Rates that fail (overflow, C1) are skipped; throws when every rate fails.
RateChoice best_rate(const Pmf& p, const std::vector<double>& rates);
/// n log-spaced rates on [r_lo, r_hi].
std::vector<double> log_grid(double r_lo, double r_hi, std::size_t n);

}  // namespace ergocert
