#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ergocert/error.hpp"
#include "ergocert/renewal.hpp"
#include "oracles.hpp"

using namespace ergocert;

namespace {

Pmf two_point() { return Pmf(1, {0.5, 0.5}); }

Pmf truncated_06() {
  std::vector<double> w(30);
  for (int k = 1; k <= 30; ++k) w[k - 1] = std::pow(0.6, k);
  return Pmf::from_weights(1, w);
}

Pmf random_pmf(std::mt19937_64& rng, std::size_t offset, std::size_t len) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> w(len);
  for (auto& x : w) x = u(rng);
  return Pmf::from_weights(offset, w);
}

}  // namespace

TEST(Pmf, ValidatesMassesAndTail) {
  EXPECT_THROW(Pmf(0, {0.5, 0.4}), InvalidInput);
  EXPECT_THROW(Pmf(0, {1.2, -0.2}), InvalidInput);
  EXPECT_NO_THROW(Pmf(0, {0.5, 0.4}, 0.1));
  EXPECT_THROW(Pmf(0, {}), InvalidInput);
}

TEST(Pmf, TextRoundTrip) {
  const Pmf p = Pmf::geometric(0.3, 50);
  const Pmf q = pmf_from_text(to_text(p));
  EXPECT_EQ(q.offset(), p.offset());
  EXPECT_EQ(q.masses(), p.masses());
  EXPECT_EQ(q.tail_mass_bound(), p.tail_mass_bound());
  EXPECT_THROW(pmf_from_text("1 0.5\n2 0.5\n"), InvalidInput);
}

TEST(Convolve, SpecExamples) {
  const Pmf g = truncated_06();
  const Pmf id = convolve(Pmf::delta(0), g);
  EXPECT_EQ(id.offset(), g.offset());
  for (std::size_t k = 0; k < 40; ++k) EXPECT_DOUBLE_EQ(id(k), g(k));

  const Pmf sq = convolve(two_point(), two_point());
  EXPECT_EQ(sq.offset(), 2u);
  EXPECT_DOUBLE_EQ(sq(2), 0.25);
  EXPECT_DOUBLE_EQ(sq(3), 0.5);
  EXPECT_DOUBLE_EQ(sq(4), 0.25);

  const Pmf shift = convolve(Pmf::delta(3), Pmf::delta(5));
  EXPECT_EQ(shift.offset(), 8u);
  EXPECT_DOUBLE_EQ(shift(8), 1.0);
}

TEST(Convolve, TruncationIsReported) {
  const Pmf g = truncated_06();
  EXPECT_THROW(convolve(g, g, {40, nullptr}), TruncationError);
  TruncationReport rep;
  const Pmf h = convolve(g, g, {40, &rep});
  EXPECT_TRUE(rep.truncated);
  EXPECT_EQ(rep.dropped_entries, 59u - 40u);
  EXPECT_NEAR(h.tail_mass_bound(), rep.dropped_mass, 1e-15);
  EXPECT_NEAR(h.stored_mass() + h.tail_mass_bound(), 1.0, 1e-12);
}

TEST(Convolve, CommutativeAndAssociative) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const Pmf a = random_pmf(rng, trial % 3, 1 + trial % 7);
    const Pmf b = random_pmf(rng, trial % 2, 2 + trial % 5);
    const Pmf c = random_pmf(rng, 1, 3 + trial % 4);
    const Pmf ab = convolve(a, b);
    const Pmf ba = convolve(b, a);
    const Pmf abc1 = convolve(ab, c);
    const Pmf abc2 = convolve(a, convolve(b, c));
    for (std::size_t k = 0; k < 30; ++k) {
      EXPECT_NEAR(ab(k), ba(k), 1e-12);
      EXPECT_NEAR(abc1(k), abc2(k), 1e-12);
    }
  }
}

TEST(RenewalSequence, SpecExamples) {
  for (double v : renewal_sequence(Pmf::delta(1), 50)) EXPECT_DOUBLE_EQ(v, 1.0);

  const auto ug = renewal_sequence(Pmf::geometric(0.3, 400), 200);
  EXPECT_DOUBLE_EQ(ug[0], 1.0);
  for (std::size_t n = 1; n <= 200; ++n) EXPECT_NEAR(ug[n], 0.3, 1e-12);

  const auto u = renewal_sequence(two_point(), 60);
  EXPECT_DOUBLE_EQ(u[1], 0.5);
  EXPECT_DOUBLE_EQ(u[2], 0.75);
  EXPECT_DOUBLE_EQ(u[3], 0.625);
  EXPECT_DOUBLE_EQ(u[4], 0.6875);
  EXPECT_NEAR(u[60], 2.0 / 3.0, 1e-15);
  EXPECT_THROW(renewal_sequence(Pmf(0, {0.5, 0.5}), 5), InvalidInput);
}

TEST(RenewalSequence, ValuesInUnitIntervalAndLimit) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Pmf p = random_pmf(rng, 1, 2 + trial);
    const auto u = renewal_sequence(p, 400);
    for (double v : u) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0 + 1e-14);
    }
    EXPECT_NEAR(u[400], 1.0 / p.mean(), 1e-8);
  }
}

TEST(StationaryDelay, SpecExamples) {
  const Pmf b1 = stationary_delay(Pmf::delta(1));
  EXPECT_EQ(b1.offset(), 0u);
  EXPECT_DOUBLE_EQ(b1(0), 1.0);

  const Pmf bg = stationary_delay(Pmf::geometric(0.3, 1500));
  for (std::size_t j = 0; j < 50; ++j) {
    EXPECT_NEAR(bg(j), 0.3 * std::pow(0.7, static_cast<double>(j)), 1e-14);
  }

  const Pmf b2 = stationary_delay(two_point());
  EXPECT_NEAR(b2(0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(b2(1), 1.0 / 3.0, 1e-15);

  EXPECT_THROW(stationary_delay(Pmf::geometric(0.3, 10)), InvalidInput);
}

TEST(StationaryDelay, ConvolutionWithRenewalIsConstant) {
  std::mt19937_64 rng(5);
  std::vector<Pmf> laws = {two_point(), truncated_06(), Pmf::from_weights(1, {1, 1, 1})};
  for (int i = 0; i < 10; ++i) laws.push_back(random_pmf(rng, 1, 3 + 2 * i));
  for (const Pmf& p : laws) {
    const Pmf b = stationary_delay(p);
    const auto u = renewal_sequence(p, 200);
    const double inv_m = 1.0 / p.mean();
    for (std::size_t j = 1; j <= 200; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k <= j; ++k) s += b(k) * u[j - k];
      EXPECT_NEAR(s, inv_m, 1e-10) << "j=" << j;
    }
  }
}

TEST(ExpMoment, SpecExamples) {
  EXPECT_NEAR(exp_moment(truncated_06(), 0.0).total(), 1.0, 1e-15);
  EXPECT_NEAR(exp_moment(Pmf::delta(2), 0.5).total(), std::exp(1.0), 1e-15);
  EXPECT_NEAR(exp_moment(two_point(), 0.2).total(), (std::exp(0.2) + std::exp(0.4)) / 2, 1e-15);
  EXPECT_NEAR(exp_moment(two_point(), 0.2).total(), 1.3566, 1e-4);
  const ExpMoment em = exp_moment(Pmf::geometric(0.5, 20), 0.1);
  EXPECT_NEAR(em.tail_correction, std::pow(0.5, 20) * std::exp(0.1 * 21), 1e-18);
  EXPECT_THROW(exp_moment(Pmf::delta(2000), 1.0), NumericOverflow);
}

TEST(UpsilonStar, SpecExamples) {
  const double e = std::exp(1.0);
  EXPECT_NEAR(upsilon_star(Pmf::delta(1), 1.0), std::log(1 + e / (e - 1) * e), 1e-14);
  EXPECT_NEAR(upsilon_star(Pmf::delta(1), 1.0), 1.668, 1e-3);
  EXPECT_THROW(upsilon_star(Pmf::delta(1), 0.0), InvalidInput);
  EXPECT_THROW(upsilon_star(Pmf::delta(1), 1e-10), InvalidInput);
  EXPECT_NEAR(upsilon_star(two_point(), 0.2), 2.138, 1e-3);
  // Pole at r -> 0: the value grows like ln(1/r).
  EXPECT_GT(upsilon_star(Pmf::delta(1), 1e-8), 18.0);
}

TEST(Sigma1Law, SpecExamples) {
  const Pmf s = sigma1_law(Pmf::delta(0), two_point(), 10);
  EXPECT_DOUBLE_EQ(s(1), 0.75);
  EXPECT_DOUBLE_EQ(s(2), 0.25);
  EXPECT_DOUBLE_EQ(s(3), 0.0);
  const Pmf d = sigma1_law(Pmf::delta(0), Pmf::delta(1), 5);
  EXPECT_DOUBLE_EQ(d(1), 1.0);
  EXPECT_THROW(sigma1_law(Pmf::delta(1), two_point(), 5), InvalidInput);
}

TEST(Sigma1Law, MassesSumToOne) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const Pmf a = random_pmf(rng, 0, 5);
    const Pmf p = random_pmf(rng, 1, 8);
    const Pmf s = sigma1_law(a, p, 20);
    EXPECT_NEAR(s.stored_mass(), 1.0, 1e-10);
  }
}

namespace {

void expect_log_close(const Magnitude& m, long double lg, const char* what) {
  const double got = m.log_double();
  EXPECT_NEAR(got, static_cast<double>(lg), 1e-12 * std::max(1.0L, std::fabs(lg))) << what;
}

void expect_matches_oracle(const CouplingConstants& c, const oracle::Coupling& o) {
  EXPECT_NEAR(c.r1.to_double(), static_cast<double>(o.r1), 1e-12 * static_cast<double>(o.r1));
  EXPECT_NEAR(c.rho_star.to_double(), static_cast<double>(o.rho_star),
              1e-12 * static_cast<double>(o.rho_star));
  expect_log_close(c.a_star, o.log_a_star, "A*");
  EXPECT_EQ(std::round(c.l_star.to_double()), static_cast<double>(o.l_star));
  expect_log_close(c.a1_star, o.log_a1_star, "A1*");
  expect_log_close(c.gamma_star, std::log(o.gamma_star), "gamma*");
  expect_log_close(c.varsigma_star, o.log_varsigma, "varsigma*");
  expect_log_close(c.iota_star, o.log_iota_star, "iota*");
  expect_log_close(c.gamma1, o.log_gamma1, "gamma1");
  expect_log_close(c.a2_star, o.log_a2_star, "A2*");
  expect_log_close(c.m_star, o.log_m_star, "M*");
  expect_log_close(c.kappa, o.log_kappa, "kappa");
}

}  // namespace

TEST(CouplingConstants, GeometricLedgerMatchesOracle) {
  // geometric q = 0.5 renormalized on 1..40 (the embedded chain never leaves 1..40).
  std::vector<double> w(40);
  for (int k = 1; k <= 40; ++k) w[k - 1] = std::pow(0.5, k);
  const Pmf p = Pmf::from_weights(1, w);
  const double r = 0.1;
  const double ups = upsilon_star(p, r);
  const CouplingConstants c = coupling_constants(Pmf::delta(0), p, r, ups, C1Scope::reachable);
  const long double p1 = p(1);
  const long double pmin = p(40);
  const auto o = oracle::coupling(r, ups, [&](long double) {
    return std::log(p1 * p1 * pmin);
  });
  expect_matches_oracle(c, o);
  EXPECT_GT(c.l_star.to_double(), 40.0);
  // The literal rule asks for p(l) > 0 up to l* and therefore refuses this law.
  EXPECT_THROW(coupling_constants(Pmf::delta(0), p, r, ups), ConditionFailure);
}

TEST(CouplingConstants, InvariantsHoldOnRandomInputs) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ur(0.02, 1.5);
  for (int trial = 0; trial < 40; ++trial) {
    const Pmf p = random_pmf(rng, 1, 2 + trial % 9);
    const double r = ur(rng);
    const CouplingConstants c =
        coupling_constants(Pmf::delta(0), p, r, upsilon_star(p, r), C1Scope::reachable);
    const double ups = c.upsilon_star.to_double();
    EXPECT_NEAR(c.r1.to_double(), r * r / (2 * ups), 1e-14);
    EXPECT_NEAR(c.rho_star.to_double(), -std::expm1(-c.r1.to_double()) / 2, 1e-15);
    EXPECT_NEAR(c.gamma_star.to_double(), -std::log1p(-c.rho_star.to_double()) / 2, 1e-15);
    EXPECT_TRUE(!(c.gamma_star < c.gamma1) && !(c.iota_star < c.gamma1));
    EXPECT_NEAR(c.kappa.log_double(),
                c.gamma1.log_double() + std::log(r) - std::log(2 * ups), 1e-12);
    EXPECT_TRUE(c.kappa <= Magnitude(r / 2));
    EXPECT_TRUE(c.varsigma_star < Magnitude(1.0));
  }
}

TEST(CouplingConstants, SupportGapFailsC1) {
  EXPECT_THROW(coupling_constants(Pmf::delta(0), two_point(), 0.2, upsilon_star(two_point(), 0.2)),
               ConditionFailure);
  const Pmf gap(1, {0.5, 0.0, 0.5});
  EXPECT_THROW(coupling_constants(Pmf::delta(0), gap, 0.2, upsilon_star(gap, 0.2),
                                  C1Scope::reachable),
               ConditionFailure);
  // A truncated law with positive tail cannot certify C1 past its stored support.
  const Pmf short_geo = Pmf::geometric(0.5, 40);
  EXPECT_THROW(coupling_constants(Pmf::delta(0), short_geo, 0.1, upsilon_star(short_geo, 0.1)),
               ConditionFailure);
}

TEST(KendallBound, DominatesExactDeviation) {
  std::vector<Pmf> laws = {truncated_06(), Pmf::from_weights(1, {1, 1, 1}), two_point(),
                           Pmf::geometric(0.5, 1000), Pmf::geometric(0.3, 1500)};
  for (const Pmf& p : laws) {
    const auto u = renewal_sequence(p, 200);
    double mean = 0.0;
    for (std::size_t k = 1; k < p.end(); ++k) mean += static_cast<double>(k) * p(k);
    for (double r : {0.05, 0.2, 0.4}) {
      const KendallBound kb = kendall_bound(p, r);
      for (std::size_t n = 2; n <= 200; ++n) {
        EXPECT_TRUE(kb.dominates(std::fabs(u[n] - 1.0 / mean), static_cast<double>(n)))
            << "n=" << n << " r=" << r;
      }
    }
  }
}

TEST(KendallBound, DegenerateUnitIncrement) {
  // u(n) - 1/m vanishes for n >= 1, so any bound holds; the literal C1 range refuses it.
  EXPECT_THROW(kendall_bound(Pmf::delta(1), 0.5, C1Scope::through_l_star), ConditionFailure);
  const KendallBound kb = kendall_bound(Pmf::delta(1), 0.5);
  EXPECT_TRUE(kb.kappa > Magnitude(1e-300));
}

TEST(KendallBound, BestRatePicksLargestKappa) {
  const Pmf p = truncated_06();
  const auto grid = log_grid(0.01, 1.0, 9);
  const RateChoice best = best_rate(p, grid);
  for (double r : grid) EXPECT_TRUE(kendall_bound(p, r).kappa <= best.bound.kappa);
}
