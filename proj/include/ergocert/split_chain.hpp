#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ergocert/finite_chain.hpp"
#include "ergocert/pmf.hpp"

namespace ergocert {

/// Splitting of a finite chain on its small set C with minorization P(x, .) >= 2 delta nu on C.
///
/// Doubled indexing: base state i at level 0 is index i, at level 1 index n + i.
/// The atom is the level-1 copy of C. Level-1 copies of states outside C are
/// unreachable and keep the atom row for index stability.
struct SplitChain {
  FiniteChain base;
  std::vector<int> c_set;
  double delta = 0.0;
  Eigen::VectorXd nu;          ///< over base states, supported in C
  Eigen::MatrixXd transition;  ///< 2n x 2n
  std::vector<int> atom;       ///< n + c for c in C

  int n_base() const { return base.n_states(); }
  int n_states() const { return 2 * base.n_states(); }
  std::vector<bool> atom_mask() const;
};

/// lambda* : level 0 gets (1-delta) lambda on C and lambda off C; level 1 gets delta lambda on C.
Eigen::VectorXd lift_measure(const Eigen::VectorXd& lambda, double delta,
                             const std::vector<int>& c_set);

/// Throws InvalidInput for delta outside (0, 1/2), nu(C) != 1, or violated
/// minorization (the message lists the offending (x, y) pairs).
SplitChain build_split(const FiniteChain& chain, const std::vector<int>& c_set, double delta,
                       const Eigen::VectorXd& nu);

struct AtomReturnLaw {
  Pmf law;                ///< P(tau_alpha = k), k = 1..n_max; the tail holds the residual
  double residual = 0.0;  ///< 1 - sum of the stored masses
  std::string warning;    ///< nonempty when residual > tolerance
};

AtomReturnLaw atom_return_law(const SplitChain& split, std::size_t n_max,
                              double tolerance = 1e-10);

struct KacResult {
  Eigen::VectorXd pi_split;
  Eigen::VectorXd pi_base;
  double mean_return_time = 0.0;  ///< E_alpha tau_alpha
  double residual = 0.0;          ///< || pi_base P - pi_base ||_inf
};

/// Invariant measure from expected occupation over one excursion from the atom.
/// Throws InvalidInput when the base chain is reducible.
KacResult kac_invariant(const SplitChain& split);

/// Sequences indexed from 0:
///  t(k) = E_alpha f(X_k) 1{tau >= k} (t(0) = 0),
///  gamma(j) = P_x(tau = j) (gamma(0) = 0),
///  u(l) = P_alpha(X_l in alpha) (u(0) = 1).
struct RegenerativeTerms {
  std::vector<double> t;
  std::vector<double> gamma;
  std::vector<double> u;
  /// (gamma * u * t)(n).
  double convolution(std::size_t n) const;
};

RegenerativeTerms regenerative_terms(const SplitChain& split, const Eigen::VectorXd& f,
                                     int x_start, std::size_t n_max);

/// E_x f(X_n) 1{tau_alpha < n} for n = 0..n_max by matrix powers.
std::vector<double> first_entrance_part(const SplitChain& split, const Eigen::VectorXd& f,
                                        int x_start, std::size_t n_max);

/// h(n - 1, x) = P_x(at least n visits to C0 u C1 strictly before tau_alpha), n = 1..n_max.
/// Rows are n - 1, columns the doubled states.
Eigen::MatrixXd taboo_visit_probabilities(const SplitChain& split, std::size_t n_max);

/// Solves x (I - q) = b for a row vector x. Dense LU below 2000 states, Neumann
/// iteration above; throws Error when the iteration does not settle.
Eigen::RowVectorXd solve_left_taboo(const Eigen::MatrixXd& q, const Eigen::RowVectorXd& b);

}  // namespace ergocert
