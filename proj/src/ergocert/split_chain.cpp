#include "ergocert/split_chain.hpp"

#include <cmath>
#include <cstdio>

#include "ergocert/error.hpp"

namespace ergocert {

namespace {

constexpr Eigen::Index kDenseLimit = 2000;

std::string pair_list(const std::vector<std::pair<int, int>>& pairs) {
  std::string s;
  const std::size_t shown = std::min<std::size_t>(pairs.size(), 20);
  for (std::size_t i = 0; i < shown; ++i) {
    if (i) s += ", ";
    s += "(" + std::to_string(pairs[i].first) + ", " + std::to_string(pairs[i].second) + ")";
  }
  if (pairs.size() > shown) s += ", ... (" + std::to_string(pairs.size()) + " total)";
  return s;
}

// Row vector with the atom coordinates zeroed.
Eigen::RowVectorXd off_atom(Eigen::RowVectorXd v, const std::vector<int>& atom) {
  for (int a : atom) v(a) = 0.0;
  return v;
}

double atom_mass(const Eigen::RowVectorXd& v, const std::vector<int>& atom) {
  double s = 0.0;
  for (int a : atom) s += v(a);
  return s;
}

Eigen::VectorXd lift_function(const Eigen::VectorXd& f, int n) {
  Eigen::VectorXd g(2 * n);
  g << f, f;
  return g;
}

// Solves (I - q) x = b for a column block.
Eigen::MatrixXd solve_right_taboo(const Eigen::MatrixXd& q, const Eigen::MatrixXd& b) {
  if (q.rows() < kDenseLimit) {
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(q.rows(), q.cols()) - q;
    return a.partialPivLu().solve(b);
  }
  Eigen::MatrixXd x = b;
  for (int it = 0; it < 1000000; ++it) {
    Eigen::MatrixXd next = b + q * x;
    const double diff = (next - x).cwiseAbs().maxCoeff();
    x.swap(next);
    if (diff <= 1e-15 * std::max(1.0, x.cwiseAbs().maxCoeff())) return x;
  }
  throw Error("taboo solve did not converge");
}

}  // namespace

std::vector<bool> SplitChain::atom_mask() const {
  std::vector<bool> m(n_states(), false);
  for (int a : atom) m[a] = true;
  return m;
}

Eigen::VectorXd lift_measure(const Eigen::VectorXd& lambda, double delta,
                             const std::vector<int>& c_set) {
  if (!(delta > 0.0 && delta < 0.5)) throw InvalidInput("lift_measure: delta must lie in (0, 1/2)");
  const auto n = static_cast<int>(lambda.size());
  const auto in_c = membership(n, c_set, "lift_measure");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(2 * n);
  for (int i = 0; i < n; ++i) {
    if (in_c[i]) {
      out(i) = (1.0 - delta) * lambda(i);
      out(n + i) = delta * lambda(i);
    } else {
      out(i) = lambda(i);
    }
  }
  return out;
}

SplitChain build_split(const FiniteChain& chain, const std::vector<int>& c_set, double delta,
                       const Eigen::VectorXd& nu) {
  const int n = chain.n_states();
  if (!(delta > 0.0 && delta < 0.5)) {
    throw InvalidInput("build_split: delta must lie in (0, 1/2), got " + std::to_string(delta));
  }
  if (nu.size() != n) throw InvalidInput("build_split: nu has the wrong length");
  const auto in_c = membership(n, c_set, "build_split");
  if (c_set.empty()) throw InvalidInput("build_split: C is empty");
  double nu_c = 0.0;
  for (int y = 0; y < n; ++y) {
    if (!(nu(y) >= 0.0)) throw InvalidInput("build_split: nu has a negative entry");
    if (nu(y) > 0.0 && !in_c[y]) {
      throw InvalidInput("build_split: nu charges state " + std::to_string(y) + " outside C");
    }
    nu_c += nu(y);
  }
  if (std::fabs(nu_c - 1.0) > 1e-12) throw InvalidInput("build_split: nu(C) must equal 1");

  std::vector<std::pair<int, int>> bad;
  for (int x : c_set) {
    for (int y = 0; y < n; ++y) {
      if (chain.transition(x, y) < 2.0 * delta * nu(y) - 1e-15) bad.emplace_back(x, y);
    }
  }
  if (!bad.empty()) {
    throw InvalidInput("build_split: minorization P(x, y) >= 2 delta nu(y) fails at " +
                       pair_list(bad));
  }

  SplitChain s;
  s.base = chain;
  s.c_set = c_set;
  s.delta = delta;
  s.nu = nu;
  s.transition = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  const Eigen::VectorXd nu_lift = lift_measure(nu, delta, c_set);
  for (int x = 0; x < n; ++x) {
    Eigen::VectorXd row = chain.transition.row(x).transpose();
    if (in_c[x]) {
      row = ((row - delta * nu) / (1.0 - delta)).cwiseMax(0.0);
    }
    s.transition.row(x) = lift_measure(row, delta, c_set).transpose();
    s.transition.row(n + x) = nu_lift.transpose();
  }
  for (int c : c_set) s.atom.push_back(n + c);
  return s;
}

AtomReturnLaw atom_return_law(const SplitChain& split, std::size_t n_max, double tolerance) {
  if (n_max == 0) throw InvalidInput("atom_return_law: n_max must be >= 1");
  Eigen::RowVectorXd mu = split.transition.row(split.atom.front());
  std::vector<double> p(n_max, 0.0);
  double total = 0.0;
  for (std::size_t k = 1; k <= n_max; ++k) {
    if (k > 1) mu = off_atom(mu, split.atom) * split.transition;
    p[k - 1] = atom_mass(mu, split.atom);
    total += p[k - 1];
  }
  AtomReturnLaw out;
  out.residual = std::max(0.0, 1.0 - total);
  out.law = Pmf(1, std::move(p), out.residual);
  if (out.residual > tolerance) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "atom_return_law: residual mass %.3g beyond n_max = %zu",
                  out.residual, n_max);
    out.warning = buf;
  }
  return out;
}

Eigen::RowVectorXd solve_left_taboo(const Eigen::MatrixXd& q, const Eigen::RowVectorXd& b) {
  return solve_right_taboo(q.transpose(), b.transpose()).transpose();
}

KacResult kac_invariant(const SplitChain& split) {
  if (!split.base.irreducible()) throw InvalidInput("kac_invariant: base chain is reducible");
  const int n2 = split.n_states();
  const auto in_atom = split.atom_mask();
  std::vector<int> taboo;
  for (int i = 0; i < n2; ++i) {
    if (!in_atom[i]) taboo.push_back(i);
  }
  const auto m = static_cast<Eigen::Index>(taboo.size());
  const Eigen::RowVectorXd start = split.transition.row(split.atom.front());

  // Expected visits to taboo states over times 1..tau-1.
  Eigen::RowVectorXd occ_t = Eigen::RowVectorXd::Zero(m);
  if (m > 0) {
    Eigen::MatrixXd q(m, m);
    Eigen::RowVectorXd b(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      b(i) = start(taboo[i]);
      for (Eigen::Index j = 0; j < m; ++j) q(i, j) = split.transition(taboo[i], taboo[j]);
    }
    occ_t = solve_left_taboo(q, b);
  }
  Eigen::RowVectorXd occ = Eigen::RowVectorXd::Zero(n2);
  for (Eigen::Index i = 0; i < m; ++i) occ(taboo[i]) = std::max(0.0, occ_t(i));
  // The visit at time tau lands in the atom: its law is start + occ_T Q restricted to the atom.
  const Eigen::RowVectorXd entry = start + occ * split.transition;
  for (int a : split.atom) occ(a) = entry(a);

  KacResult out;
  out.mean_return_time = occ.sum();
  out.pi_split = (occ / out.mean_return_time).transpose();
  const int n = split.n_base();
  out.pi_base = out.pi_split.head(n) + out.pi_split.tail(n);
  out.residual =
      (out.pi_base.transpose() * split.base.transition - out.pi_base.transpose()).cwiseAbs().maxCoeff();
  return out;
}

double RegenerativeTerms::convolution(std::size_t n) const {
  double s = 0.0;
  for (std::size_t j = 1; j <= n && j < gamma.size(); ++j) {
    if (gamma[j] == 0.0) continue;
    for (std::size_t l = 0; j + l < n && l < u.size(); ++l) {
      const std::size_t k = n - j - l;
      if (k < t.size()) s += gamma[j] * u[l] * t[k];
    }
  }
  return s;
}

RegenerativeTerms regenerative_terms(const SplitChain& split, const Eigen::VectorXd& f,
                                     int x_start, std::size_t n_max) {
  const int n = split.n_base();
  if (f.size() != n) throw InvalidInput("regenerative_terms: f has the wrong length");
  if (x_start < 0 || x_start >= split.n_states()) {
    throw InvalidInput("regenerative_terms: x_start out of range");
  }
  const Eigen::VectorXd fl = lift_function(f, n);
  RegenerativeTerms r;
  r.t.assign(n_max + 1, 0.0);
  r.gamma.assign(n_max + 1, 0.0);
  r.u.assign(n_max + 1, 0.0);

  Eigen::RowVectorXd from_atom = split.transition.row(split.atom.front());
  Eigen::RowVectorXd from_x = split.transition.row(x_start);
  Eigen::RowVectorXd occ_atom = from_atom;  // P_alpha(X_l = .)
  r.u[0] = 1.0;
  for (std::size_t k = 1; k <= n_max; ++k) {
    if (k > 1) {
      from_atom = off_atom(from_atom, split.atom) * split.transition;
      from_x = off_atom(from_x, split.atom) * split.transition;
      occ_atom = occ_atom * split.transition;
    }
    r.t[k] = from_atom.dot(fl);
    r.gamma[k] = atom_mass(from_x, split.atom);
    r.u[k] = atom_mass(occ_atom, split.atom);
  }
  return r;
}

std::vector<double> first_entrance_part(const SplitChain& split, const Eigen::VectorXd& f,
                                        int x_start, std::size_t n_max) {
  const int n = split.n_base();
  if (f.size() != n) throw InvalidInput("first_entrance_part: f has the wrong length");
  const Eigen::VectorXd fl = lift_function(f, n);
  std::vector<double> out(n_max + 1, 0.0);
  Eigen::RowVectorXd full = Eigen::RowVectorXd::Zero(split.n_states());
  full(x_start) = 1.0;
  Eigen::RowVectorXd taboo = full;
  for (std::size_t k = 1; k <= n_max; ++k) {
    full = full * split.transition;
    // taboo holds the law restricted to {tau >= k}: no atom visit at times 1..k-1.
    taboo = (k == 1 ? taboo : off_atom(taboo, split.atom)) * split.transition;
    out[k] = full.dot(fl) - taboo.dot(fl);
  }
  return out;
}

Eigen::MatrixXd taboo_visit_probabilities(const SplitChain& split, std::size_t n_max) {
  const int n = split.n_base();
  const int n2 = split.n_states();
  std::vector<int> c0;
  std::vector<int> rest;  // states outside C0 u C1
  std::vector<bool> in_tilde(n2, false);
  for (int c : split.c_set) {
    c0.push_back(c);
    in_tilde[c] = in_tilde[n + c] = true;
  }
  for (int i = 0; i < n2; ++i) {
    if (!in_tilde[i]) rest.push_back(i);
  }
  const auto nc = static_cast<Eigen::Index>(c0.size());
  const auto nr = static_cast<Eigen::Index>(rest.size());

  // g(z, c): probability that the first entrance to C0 u C1 at a time >= 1 is at c in C0.
  Eigen::MatrixXd g_rest = Eigen::MatrixXd::Zero(nr, nc);
  if (nr > 0) {
    Eigen::MatrixXd q(nr, nr);
    Eigen::MatrixXd b(nr, nc);
    for (Eigen::Index i = 0; i < nr; ++i) {
      for (Eigen::Index j = 0; j < nr; ++j) q(i, j) = split.transition(rest[i], rest[j]);
      for (Eigen::Index j = 0; j < nc; ++j) b(i, j) = split.transition(rest[i], c0[j]);
    }
    g_rest = solve_right_taboo(q, b);
  }
  Eigen::MatrixXd g(n2, nc);
  for (int z = 0; z < n2; ++z) {
    for (Eigen::Index j = 0; j < nc; ++j) {
      double s = split.transition(z, c0[j]);
      for (Eigen::Index i = 0; i < nr; ++i) s += split.transition(z, rest[i]) * g_rest(i, j);
      g(z, j) = s;
    }
  }
  Eigen::MatrixXd g_cc(nc, nc);
  for (Eigen::Index i = 0; i < nc; ++i) g_cc.row(i) = g.row(c0[i]);

  Eigen::MatrixXd h(n_max, n2);
  Eigen::VectorXd tail = Eigen::VectorXd::Ones(nc);  // P_c(at least m more visits), m = n - 1
  for (std::size_t k = 0; k < n_max; ++k) {
    h.row(static_cast<Eigen::Index>(k)) = (g * tail).transpose().cwiseMin(1.0).cwiseMax(0.0);
    tail = g_cc * tail;
  }
  return h;
}

}  // namespace ergocert
