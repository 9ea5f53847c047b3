#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dgsim/bounds.hpp"
#include "dgsim/estimators.hpp"
#include "dgsim/risk.hpp"
#include "test_util.hpp"

using namespace dgsim;

namespace {

BoundQuery defaults(Index D) {
  BoundQuery q;
  q.num_domains = D;
  return q;
}

}  // namespace

TEST(BoundQuery, FromDefaultConfig) {
  const BoundQuery q = BoundQuery::from_config(default_config(4), 50);
  EXPECT_NEAR(q.gamma_sq, 10.0, 1e-12);
  EXPECT_DOUBLE_EQ(q.tau_sq, 1.0);
  EXPECT_NEAR(q.theta_core_norm_sq, 1.0, 1e-12);
  EXPECT_EQ(q.d_core, 5);
  EXPECT_EQ(q.d_dom, 505);
  EXPECT_EQ(q.num_domains, 50);
  EXPECT_DOUBLE_EQ(q.r_or_default(), 0.1);
}

TEST(BoundQuery, Validate) {
  BoundQuery q = defaults(10);
  EXPECT_NO_THROW(q.validate());
  q.r = 1.0;
  EXPECT_THROW(q.validate(), ArgumentError);
  q = defaults(10);
  q.r0 = 0.0;
  EXPECT_THROW(q.validate(), ArgumentError);
  q = defaults(10);
  q.delta = 1.0;
  EXPECT_THROW(q.validate(), ArgumentError);
  q = defaults(10);
  q.gamma_sq = 0.0;
  EXPECT_THROW(q.validate(), ArgumentError);
}

TEST(LowerBound, Values) {
  EXPECT_NEAR(*lower_bound_unaugmented(defaults(100)), 10.0 / 11.0 * (1.0 - 100.0 / 505.0),
              1e-14);
  EXPECT_NEAR(*lower_bound_unaugmented(defaults(100)), 0.7291, 5e-5);
  EXPECT_DOUBLE_EQ(lower_bound_formula(defaults(505)), 0.0);
  EXPECT_FALSE(lower_bound_unaugmented(defaults(505)).has_value());
  EXPECT_FALSE(lower_bound_unaugmented(defaults(1000)).has_value());
  EXPECT_TRUE(lower_bound_unaugmented(defaults(504)).has_value());
}

TEST(InvariantExact, Values) {
  EXPECT_NEAR(invariant_excess_exact(defaults(1)), 10.0 / 11.0, 1e-15);
  EXPECT_NEAR(invariant_excess_exact(defaults(1)), 0.9091, 5e-5);
  BoundQuery q = defaults(1);
  q.gamma_sq = 1e12;
  EXPECT_NEAR(invariant_excess_exact(q), q.tau_sq * q.theta_core_norm_sq, 1e-10);
  q = defaults(1);
  q.theta_core_norm_sq = 0.0;
  EXPECT_DOUBLE_EQ(invariant_excess_exact(q), 0.0);
  EXPECT_DOUBLE_EQ(invariant_excess_exact(defaults(7)), invariant_excess_exact(defaults(700)));
}

TEST(InvariantExact, EqualsInvariantEstimatorExcess) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const GeneratorConfig c = default_config(s);
    const DomainMoment m = compute_moments(sample_domains(c, 20, s));
    const double exact = invariant_excess_exact(BoundQuery::from_config(c, 20));
    const double analytic =
        analytic_ood_risk(population_estimator(m, c, AugmentationKind::kDomainInvariant), c) -
        oracle_ood_risk(c);
    EXPECT_NEAR(analytic, exact, 1e-12);
    EXPECT_NEAR(spectral_excess_ood(AugmentationKind::kDomainInvariant, m, c), exact, 1e-12);
  }
}

TEST(UpperBound, Values) {
  const BoundQuery q = defaults(1000);
  const double K = 10.0 / 11.0;
  const double eta_sq = 2.0 * 7.0 * std::log(4.0 * 1000.0 * 5.0) / 1000.0;
  const double general = K * (1.0 / 1000.0 + eta_sq / std::pow(1.0 + 10.0 * (1.0 - std::sqrt(eta_sq)), 2));
  const double simple = K * (1.0 / 1000.0 + eta_sq / std::pow(1.0 + 10.0 * 0.1, 2));
  const TargetedUpperBounds u = upper_bound_targeted(q);
  ASSERT_TRUE(u.general && u.simple);
  EXPECT_NEAR(*u.general, general, 1e-14);
  EXPECT_NEAR(*u.simple, simple, 1e-14);
}

TEST(UpperBound, GeneralIsTighterWhenBothApply) {
  int both = 0;
  for (Index D = 1; D <= 100000; D = D < 100 ? D + 1 : D * 11 / 10) {
    const TargetedUpperBounds u = upper_bound_targeted(defaults(D));
    if (u.general && u.simple) {
      ++both;
      EXPECT_LE(*u.general, *u.simple) << "D=" << D;
    }
    if (u.simple) {
      EXPECT_TRUE(u.general.has_value()) << "D=" << D;
    }
    if (u.general) {
      EXPECT_GE(*u.general, 0.0);
    }
  }
  EXPECT_GT(both, 10);
}

TEST(UpperBound, ApplicabilityThresholds) {
  for (Index D : {10, 50, 100, 200, 500, 1000, 5000}) {
    const double dd = static_cast<double>(D);
    const double general_thr = 2.0 * 7.0 * std::log(4.0 * dd * 5.0);
    const double simple_thr = general_thr / (0.9 * 0.9);
    const TargetedUpperBounds u = upper_bound_targeted(defaults(D));
    EXPECT_EQ(u.general.has_value(), dd > general_thr) << "D=" << D;
    EXPECT_EQ(u.simple.has_value(), dd > simple_thr) << "D=" << D;
  }
}

TEST(UpperBound, DecaysToZero) {
  const TargetedUpperBounds u = upper_bound_targeted(defaults(1000000));
  ASSERT_TRUE(u.general && u.simple);
  EXPECT_LT(*u.general, 1e-3);
  EXPECT_LT(*u.simple, 1e-3);
}

TEST(UpperBound, NeedsGammaAboveOne) {
  BoundQuery q = defaults(5000);
  q.gamma_sq = 0.9;
  const TargetedUpperBounds u = upper_bound_targeted(q);
  EXPECT_FALSE(u.general.has_value());
  EXPECT_FALSE(u.simple.has_value());
}

TEST(GapWindow, DefaultScalars) {
  const BoundQuery q = defaults(100);
  const double log2d = std::log(2.0 * 505.0);
  const double rhs_condition = 505.0 / (log2d * 4.0 * (1.0 + 100.0 / 81.0));
  EXPECT_EQ(gap_dcore_condition(q), 5.0 < rhs_condition);
  EXPECT_TRUE(gap_dcore_condition(q));  // 5 < 8.13
  const auto w = gap_window(q);
  ASSERT_TRUE(w.has_value());
  EXPECT_NEAR(w->d_min, 4.0 * 100.0 / 81.0 * 7.0 * log2d, 1e-10);
  EXPECT_NEAR(w->d_max, 505.0 - 4.0 * 7.0 * log2d, 1e-10);
  EXPECT_NEAR(w->d_min, 239.1, 0.05);
  EXPECT_NEAR(w->d_max, 311.3, 0.05);
  EXPECT_TRUE(w->contains(250.0));
  EXPECT_FALSE(w->contains(100.0));
}

TEST(GapWindow, Empty) {
  BoundQuery q = defaults(100);
  q.gamma_sq = 1.0;
  EXPECT_FALSE(gap_window(q).has_value());
  q = defaults(100);
  q.d_core = q.d_dom;
  EXPECT_FALSE(gap_window(q).has_value());
  // Condition as stated holds but the interval is empty.
  q = defaults(100);
  q.d_core = 8;
  EXPECT_TRUE(gap_dcore_condition(q));
  EXPECT_FALSE(gap_window(q).has_value());
}

TEST(Envelope, CoversEigenvaluesWithProbabilityOneMinusDelta) {
  GeneratorConfig c = test::small_config(1, {1, 1, 5, 1});
  const Index D = 200;
  const double delta = 0.1;
  const EigenvalueEnvelope env = eigenvalue_envelope(5, D, 1.0, delta);
  ASSERT_LT(env.eta, 1.0);
  int misses = 0;
  const int redraws = 500;
  for (int r = 0; r < redraws; ++r) {
    const DomainMoment m = compute_moments(sample_domains(c, D, static_cast<std::uint64_t>(r)));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.core, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < env.lambda_min_lb ||
        eig.eigenvalues().maxCoeff() > env.lambda_max_ub) {
      ++misses;
    }
  }
  const double frac = static_cast<double>(misses) / redraws;
  EXPECT_LE(frac, delta + 3.0 * std::sqrt(delta * (1.0 - delta) / redraws));
}

TEST(Envelope, Formula) {
  const EigenvalueEnvelope e = eigenvalue_envelope(5, 1000, 2.0, 0.1);
  const double eta = std::sqrt(-2.0 * 7.0 * std::log(0.1 / 20.0) / 1000.0);
  EXPECT_NEAR(e.eta, eta, 1e-15);
  EXPECT_NEAR(e.lambda_min_lb, 2.0 * (1.0 - eta), 1e-14);
  EXPECT_NEAR(e.lambda_max_ub, 2.0 * (1.0 + eta + eta * eta), 1e-14);
  const EigenvalueEnvelope far = eigenvalue_envelope(5, 100000000, 2.0, 0.1);
  EXPECT_NEAR(far.lambda_min_lb, 2.0, 2e-3);
  EXPECT_NEAR(far.lambda_max_ub, 2.0, 2e-3);
  double prev = std::numeric_limits<double>::infinity();
  for (double delta : {0.01, 0.1, 0.3, 0.6, 0.9, 0.99}) {
    const double eta_d = eigenvalue_envelope(5, 1000, 1.0, delta).eta;
    EXPECT_LT(eta_d, prev);
    prev = eta_d;
  }
  EXPECT_THROW(eigenvalue_envelope(5, 1000, 1.0, 0.0), ArgumentError);
  EXPECT_THROW(eigenvalue_envelope(5, 1000, 1.0, 1.0), ArgumentError);
}

TEST(GapPolynomial, StatedFormFailsOnACounterexample) {
  const GapPolynomialCheck g = gap_polynomial_check(250.0, 5.0, 505.0);
  ASSERT_TRUE(g.preconditions);
  const double lhs = 1.0 - 250.0 / 505.0 - (2.0 + std::log(4.0 * 505.0 * 5.0) * 7.0) / 500.0;
  const double rhs = -(250.0 - 252.5) * (250.0 - 252.5) + 505.0 * 505.0 / 4.0 -
                     2.0 * 505.0 * 7.0 * std::log(1010.0);
  EXPECT_NEAR(g.lhs, lhs, 1e-12);
  EXPECT_NEAR(g.rhs, rhs, 1e-8);
  EXPECT_NEAR(g.lhs, 0.372, 5e-4);
  EXPECT_NEAR(g.rhs, 14841.8, 0.05);
  EXPECT_FALSE(g.stated);
  EXPECT_TRUE(g.scaled);
}

TEST(GapPolynomial, ScaledFormHoldsOnRandomTriples) {
  std::mt19937_64 rng(11);
  int checked = 0;
  while (checked < 100) {
    const double d = std::uniform_int_distribution<int>(2, 5000)(rng);
    const double dc = std::uniform_int_distribution<int>(1, static_cast<int>(d))(rng);
    const double D = std::uniform_real_distribution<double>(0.5, 2.0 * d)(rng);
    const GapPolynomialCheck g = gap_polynomial_check(D, dc, d);
    if (!g.preconditions) continue;
    ++checked;
    // D d lhs - rhs = 2 d (dc+2) log(2d) - d (1 + log(4 d dc)(dc+2) / 2), positive since
    // log(4 d dc) <= 2 log(2d) and (dc+2) log(2d) > 1.
    const double margin =
        2.0 * d * (dc + 2.0) * std::log(2.0 * d) - d * (1.0 + std::log(4.0 * d * dc) * (dc + 2.0) / 2.0);
    EXPECT_NEAR(D * d * g.lhs - g.rhs, margin, 1e-7 * std::abs(margin) + 1e-6);
    EXPECT_GT(margin, 0.0);
    EXPECT_TRUE(g.scaled);
  }
}

TEST(BoundReport, Fields) {
  const BoundReport r = bound_report(defaults(250));
  EXPECT_TRUE(r.lower_unaug.has_value());
  EXPECT_TRUE(r.upper_tgt_general.has_value());
  EXPECT_TRUE(r.upper_tgt_simple.has_value());
  EXPECT_FALSE(bound_report(defaults(130)).upper_tgt_simple.has_value());
  EXPECT_NEAR(r.invariant_exact, 10.0 / 11.0, 1e-15);
  EXPECT_TRUE(r.in_gap_window());
  EXPECT_FALSE(bound_report(defaults(100)).in_gap_window());
  std::vector<std::string> names;
  for (const auto& c : r.conditions_met) names.push_back(c.name);
  const std::vector<std::string> expected{"d_below_ddom",      "gamma_sq_above_1",
                                          "general_sample_size", "simple_sample_size",
                                          "gap_dcore_small",   "gap_window_nonempty"};
  EXPECT_EQ(names, expected);
}

TEST(Bounds, NonnegativeWhereApplicable) {
  for (Index D = 1; D < 20000; D = D * 3 / 2 + 1) {
    const BoundReport r = bound_report(defaults(D));
    EXPECT_GE(r.lower_unaug.value_or(0.0), 0.0);
    EXPECT_GE(r.upper_tgt_general.value_or(0.0), 0.0);
    EXPECT_GE(r.upper_tgt_simple.value_or(0.0), 0.0);
    EXPECT_GE(r.invariant_exact, 0.0);
  }
}

TEST(Bounds, SandwichInsideGapWindow) {
  // Seed-averaged spectral excesses straddle the two bounds at a D inside the window.
  const Index D = 250;
  BoundQuery q = defaults(D);
  ASSERT_TRUE(bound_report(q).in_gap_window());
  std::vector<double> unaug, tgt;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const GeneratorConfig c = default_config(s);
    const DomainMoment m = compute_moments(sample_domains(c, D, s + 1000));
    unaug.push_back(spectral_excess_ood(AugmentationKind::kUnaugmented, m, c));
    tgt.push_back(spectral_excess_ood(AugmentationKind::kTargeted, m, c));
  }
  const double lb = *lower_bound_unaugmented(q);
  const double ub = *upper_bound_targeted(q).general;
  EXPECT_GE(test::mean(unaug), lb - 2.0 * test::stderr_of_mean(unaug));
  EXPECT_LE(test::mean(tgt), ub + 2.0 * test::stderr_of_mean(tgt));
  EXPECT_GT(test::mean(unaug), test::mean(tgt));
  EXPECT_GT(lb, ub);
}
