#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "ergocert/chain_cert.hpp"
#include "ergocert/error.hpp"
#include "ergocert/markov_sim.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace ergocert;

namespace {

double rel(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

// Compares every ledger log value against the long-double re-evaluation.
void expect_ledger_matches(const Certificate& c, double rho, double d, double v_star,
                           double delta) {
  const oracle::Chain o = oracle::chain(rho, d, v_star, delta);
  const std::map<std::string, long double> logs{
      {"r", std::log(o.r)},
      {"D1", o.log_d1},
      {"D_check", o.log_d_check},
      {"varsigma_split", std::log(o.varsigma_split)},
      {"D_star", o.log_d_star},
      {"iota0", std::log(o.iota0)},
      {"gamma", std::log(o.gamma)},
      {"D2", o.log_d2},
      {"moment_bound", o.log_moment},
      {"upsilon_chain", std::log(o.upsilon_chain)},
      {"renewal.r1", std::log(o.renewal.r1)},
      {"renewal.rho_star", std::log(o.renewal.rho_star)},
      {"renewal.A_star", o.renewal.log_a_star},
      {"renewal.l_star", std::log(o.renewal.l_star)},
      {"renewal.A1_star", o.renewal.log_a1_star},
      {"renewal.gamma_star", std::log(o.renewal.gamma_star)},
      {"renewal.varsigma_star", o.renewal.log_varsigma},
      {"renewal.iota_star", o.renewal.log_iota_star},
      {"renewal.gamma1", o.renewal.log_gamma1},
      {"renewal.A2_star", o.renewal.log_a2_star},
      {"renewal.M_star", o.renewal.log_m_star},
      {"renewal.kappa", o.renewal.log_kappa},
      {"kappa", o.log_kappa},
      {"Delta_star", o.renewal.log_m_star},
      {"D3", o.log_d3},
      {"varrho_star", o.log_varrho},
      {"R", o.log_r_big},
  };
  for (const auto& [name, lg] : logs) {
    const double got = c.entry(name).value.log().to_double();
    EXPECT_LE(rel(got, static_cast<double>(lg)), 1e-12)
        << name << ": " << got << " vs " << static_cast<double>(lg);
  }
}

}  // namespace

TEST(UcBound, Examples) {
  const long double e = std::exp(0.25L);
  const long double ref = (0.5L * e + e) / (1 - 0.5L * e);
  EXPECT_NEAR(uc_bound(0.5, 1.0, 0.25), static_cast<double>(ref), 1e-13);
  EXPECT_NEAR(uc_bound(0.5, 1.0, 0.25), 5.380, 5e-4);
  EXPECT_NEAR(uc_bound(0.3, 2.0, 1e-9), (1 - 0.3 + 2.0) / 0.3, 1e-6);
  try {
    uc_bound(0.5, 1.0, -std::log1p(-0.5));
    FAIL();
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("-ln(1-rho)"), std::string::npos);
  }
}

TEST(TabooBound, Examples) {
  EXPECT_EQ(taboo_bound(0.3, 1), 1.0);
  EXPECT_EQ(taboo_bound(1.0, 4), 0.0);
  EXPECT_NEAR(taboo_bound(0.2, 5), 0.4096, 1e-15);
}

TEST(UbBound, Examples) {
  const UbBound u = ub_bound(2.0, 2.0, 0.5, 0.4);
  EXPECT_NEAR(u.iota0, 0.1, 1e-15);
  EXPECT_NEAR(u.gamma, 0.1, 1e-15);
  EXPECT_NEAR(u.d1_star, 2.0 * (1.0 + 4.0 / (1.0 - std::pow(0.5, 0.25))), 1e-12);
  EXPECT_NEAR(u.d1_star, 52.3, 0.05);
  const UbBound near_one = ub_bound(2.0, 2.0, 1.0 - 1e-15, 0.4);
  EXPECT_EQ(near_one.gamma, 0.4);
  EXPECT_THROW(ub_bound(2.0, 2.0, 1.0, 0.4), InvalidInput);
  EXPECT_THROW(ub_bound(2.0, 2.0, 0.0, 0.4), InvalidInput);
  EXPECT_THROW(ub_bound(1.0, 1.0, 0.5, 0.4), InvalidInput);
}

TEST(Certificate, TwoStateLedgerMatchesOracle) {
  const Certificate c = certificate_assemble({0.5, 0.5, 1.0}, {0.35});
  expect_ledger_matches(c, 0.5, 0.5, 1.0, 0.35);
  EXPECT_TRUE(std::isfinite(c.kappa.log_double()));
  EXPECT_FALSE(c.r_big.fits_double());  // astronomically conservative but representable
  EXPECT_EQ(c.ledger.front().name, "r");
  EXPECT_EQ(c.ledger.back().name, "R");
}

TEST(Certificate, RandomParametersMatchOracle) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u01(0.05, 0.95);
  std::uniform_real_distribution<double> ud(0.01, 0.49);
  for (int trial = 0; trial < 12; ++trial) {
    const double rho = u01(rng);
    const double d = 0.1 + 3.0 * u01(rng);
    const double v_star = 1.0 + 4.0 * u01(rng);
    const double delta = std::max(0.15, ud(rng));
    const Certificate c = certificate_assemble({rho, d, v_star}, {delta});
    expect_ledger_matches(c, rho, d, v_star, delta);
  }
}

TEST(Certificate, Invariants) {
  for (double rho : {0.1, 0.5, 0.9}) {
    for (double delta : {0.2, 0.35, 0.45}) {
      const Certificate c = certificate_assemble({rho, 1.0, 1.5}, {delta});
      const double r = c.entry("r").value.to_double();
      EXPECT_LE(c.kappa.to_double(), r / 2.0);
      EXPECT_LE(r / 2.0, -0.25 * std::log1p(-rho) * (1 + 1e-15));
      EXPECT_TRUE(c.r_big >= Magnitude(1.0));
      for (const auto& e : c.ledger) EXPECT_FALSE(e.citation.empty()) << e.name;
      EXPECT_FALSE(c.audit.empty());
    }
  }
}

TEST(Certificate, MonotoneInDelta) {
  const Certificate lo = certificate_assemble({0.5, 1.0, 1.0}, {0.05});
  const Certificate hi = certificate_assemble({0.5, 1.0, 1.0}, {0.45});
  EXPECT_TRUE(hi.kappa >= lo.kappa);
}

TEST(Certificate, RhoNearOneTerminates) {
  const Certificate c = certificate_assemble({1.0 - 1e-9, 1.0, 1.0}, {0.3});
  EXPECT_GT(c.kappa.log_double(), -1e300);
  for (const auto& e : c.ledger) EXPECT_TRUE(std::isfinite(e.value.log_double())) << e.name;
}

TEST(Certificate, InvalidParameters) {
  EXPECT_THROW(certificate_assemble({0.0, 1.0, 1.0}, {0.3}), InvalidInput);
  EXPECT_THROW(certificate_assemble({0.5, 1.0, 0.5}, {0.3}), InvalidInput);
  EXPECT_THROW(certificate_assemble({0.5, 1.0, 1.0}, {0.5}), InvalidInput);
}

TEST(VerifyH1H2, TwoStateConvention) {
  const auto h = verify_h1_h2({fixture::two_state()}, Eigen::VectorXd::Ones(2), {0, 1});
  EXPECT_DOUBLE_EQ(h.drift.rho, 0.5);
  EXPECT_NEAR(h.drift.d_const, 0.5, 1e-15);
  EXPECT_NEAR(h.minor.delta.to_double(), 0.35, 1e-15);
  EXPECT_NEAR(h.nu(0), 3.0 / 7.0, 1e-15);
  EXPECT_NEAR(h.nu(1), 4.0 / 7.0, 1e-15);
}

TEST(VerifyH1H2, FamilyB) {
  const auto h = verify_h1_h2(fixture::family_b(), fixture::family_b_v(), {0});
  EXPECT_NEAR(h.drift.rho, 0.25, 1e-15);
  EXPECT_NEAR(h.drift.d_const, 0.75, 1e-15);
  EXPECT_DOUBLE_EQ(h.drift.v_star, 1.0);
  EXPECT_NEAR(h.minor.delta.to_double(), 0.25, 1e-15);
  EXPECT_DOUBLE_EQ(h.nu(0), 1.0);
}

TEST(VerifyH1H2, ShrinkingAndEmptyMinorization) {
  auto fam = std::vector<FiniteChain>{fixture::two_state(),
                                      FiniteChain::from_rows({{1.0, 0.0}, {0.2, 0.8}})};
  const auto h = verify_h1_h2(fam, Eigen::VectorXd::Ones(2), {0, 1});
  // Column minima (0.2, 0): nu collapses onto state 0.
  EXPECT_DOUBLE_EQ(h.nu(0), 1.0);
  EXPECT_DOUBLE_EQ(h.nu(1), 0.0);
  EXPECT_NEAR(h.minor.delta.to_double(), 0.1, 1e-15);
  fam.push_back(FiniteChain::from_rows({{0.0, 1.0}, {1.0, 0.0}}));
  EXPECT_THROW(verify_h1_h2(fam, Eigen::VectorXd::Ones(2), {0, 1}), ConditionFailure);
}

TEST(UcExact, DominatedByD1) {
  std::mt19937_64 rng(8);
  std::vector<std::pair<std::vector<FiniteChain>, std::pair<Eigen::VectorXd, std::vector<int>>>> cases;
  cases.push_back({fixture::family_b(), {fixture::family_b_v(), {0}}});
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 4;
    std::vector<FiniteChain> fam;
    for (int k = 0; k < 3; ++k) {
      Eigen::MatrixXd p(n, n);
      // Birth-death drift towards state 0.
      std::uniform_real_distribution<double> u(0.05, 0.2);
      p.setZero();
      for (int i = 0; i < n; ++i) {
        const double up = i + 1 < n ? u(rng) : 0.0;
        const double down = i > 0 ? 0.5 + u(rng) : 0.0;
        if (i + 1 < n) p(i, i + 1) = up;
        if (i > 0) p(i, i - 1) = down;
        p(i, i) = 1.0 - up - down;
      }
      fam.emplace_back(p);
    }
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = std::pow(1.5, i);
    cases.push_back({fam, {v, {0, 1}}});
  }
  for (const auto& [fam, vc] : cases) {
    const auto& [v, c] = vc;
    const auto h = verify_h1_h2(fam, v, c);
    const double r_max = -std::log1p(-h.drift.rho);
    for (double frac : {0.1, 0.5, 0.9}) {
      const double r = frac * r_max;
      const double d1 = uc_bound(h.drift.rho, h.drift.d_const, r);
      for (const auto& ch : fam) {
        const Eigen::VectorXd uc = uc_exact(ch, v, c, r);
        for (int x = 0; x < ch.n_states(); ++x) EXPECT_LE(uc(x) / v(x), d1 * (1 + 1e-12));
      }
    }
  }
}

TEST(EndToEnd, FamilyDomination) {
  const auto fam = fixture::family_b();
  const Eigen::VectorXd v = fixture::family_b_v();
  const auto h = verify_h1_h2(fam, v, {0});
  const Certificate cert = certificate_assemble(h.drift, h.minor);
  for (const auto& ch : fam) {
    for (int x = 0; x < 2; ++x) {
      const auto dev = deviation_curve(ch, v, x, 500);
      for (long n = 0; n <= 500; ++n) {
        EXPECT_TRUE(cert.dominates(dev[n], static_cast<double>(n), v(x))) << n;
      }
    }
  }
}
