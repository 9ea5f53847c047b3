#include <gtest/gtest.h>

#include "dgsim/risk.hpp"
#include "test_util.hpp"

using namespace dgsim;
using dgsim::test::small_config;

namespace {

constexpr double kOracleRisk = 0.01 + 0.1 / 1.1;

const AugmentationKind kKinds[] = {AugmentationKind::kUnaugmented, AugmentationKind::kOffTheShelf,
                                   AugmentationKind::kDomainInvariant,
                                   AugmentationKind::kTargeted};

// Excess risk by direct expansion: E over x of (theta - theta_oracle)^T Cov (theta - theta_oracle)
// on the domain blocks, with Cov = Sigma + T.
double excess_by_expansion(const LinearModel& m, const GeneratorConfig& c) {
  const LinearModel o = oracle_model(c);
  Eigen::VectorXd cov(c.dims.domain_size());
  cov.head(c.dims.core).setConstant(c.sigma_core_sq + c.tau_core_sq);
  cov.tail(c.dims.spu).setConstant(c.sigma_spu_sq + c.tau_spu_sq);
  const Eigen::VectorXd d = m.domain() - o.domain();
  return d.cwiseAbs2().dot(cov) + (m.obj() - o.obj()).squaredNorm() +
         (m.noise() - o.noise()).squaredNorm();
}

}  // namespace

TEST(AnalyticRisk, OracleValue) {
  const GeneratorConfig c = default_config(3);
  EXPECT_NEAR(analytic_ood_risk(oracle_model(c), c), kOracleRisk, 1e-12);
  EXPECT_NEAR(oracle_ood_risk(c), kOracleRisk, 1e-12);
  EXPECT_NEAR(oracle_ood_risk(c), 0.10091, 5e-6);
}

TEST(AnalyticRisk, ZeroModel) {
  GeneratorConfig c = default_config(3);
  c.theta_star.obj().setZero();
  EXPECT_NEAR(analytic_ood_risk(LinearModel(c.dims), c), 1.01, 1e-12);
}

TEST(AnalyticRisk, ThetaStarWithoutSpu) {
  const GeneratorConfig c = default_config(4);
  EXPECT_NEAR(analytic_ood_risk(c.theta_star, c), 0.01 + 0.1, 1e-12);
}

TEST(AnalyticRisk, ExcessMatchesExpansionForArbitraryModels) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal;
  for (std::uint64_t s = 0; s < 20; ++s) {
    GeneratorConfig c = small_config(s);
    c.sigma_spu_sq = 0.3;
    c.tau_spu_sq = 2.0;
    LinearModel m(c.dims);
    for (Index j = 0; j < m.size(); ++j) m.values()(j) = normal(rng);
    EXPECT_NEAR(analytic_ood_risk(m, c) - oracle_ood_risk(c), excess_by_expansion(m, c), 1e-10);
  }
}

TEST(AnalyticRisk, IdRisk) {
  // ID risk sits below OOD risk by about 0.85% at D = 10^4 (fit to M, scored on T);
  // single draws straddle 1%, so the relative gap is averaged over seeds.
  double rel_gap = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const GeneratorConfig c = default_config(s);
    const DomainMoment m = compute_moments(sample_domains(c, 10000, s + 1));
    const LinearModel unaug = population_estimator(m, c, AugmentationKind::kUnaugmented);
    const double ood = analytic_ood_risk(unaug, c);
    rel_gap += std::abs(analytic_id_risk(unaug, m, c) - ood) / ood / 10.0;
  }
  EXPECT_LE(rel_gap, 0.01);

  for (std::uint64_t s = 0; s < 10; ++s) {
    const GeneratorConfig cs = small_config(s);
    const DomainMoment ms = compute_moments(sample_domains(cs, 3, s));
    const LinearModel u = population_estimator(ms, cs, AugmentationKind::kUnaugmented);
    EXPECT_LE(analytic_id_risk(u, ms, cs), analytic_id_risk(oracle_model(cs), ms, cs) + 1e-12);
  }

  GeneratorConfig z = small_config(2);
  z.theta_star.values().setZero();
  const DomainMoment mz = compute_moments(sample_domains(z, 5, 1));
  EXPECT_NEAR(analytic_id_risk(LinearModel(z.dims), mz, z), 0.01, 1e-15);
}

TEST(AnalyticRisk, OracleLimits) {
  GeneratorConfig c = small_config();
  c.sigma_core_sq = 1e-15;
  EXPECT_NEAR(oracle_ood_risk(c), 0.01, 1e-12);
  c = small_config();
  c.theta_star.core().setZero();
  EXPECT_DOUBLE_EQ(oracle_ood_risk(c), 0.01);
}

TEST(AnalyticRisk, RejectsMismatchedModel) {
  const GeneratorConfig c = small_config();
  EXPECT_THROW(analytic_ood_risk(LinearModel(BlockLayout{1, 1, 1, 1}), c), ArgumentError);
}

TEST(AnalyticRisk, LongDoubleAgrees) {
  const GeneratorConfig c = small_config(8);
  const auto domains = sample_domains(c, 4, 2);
  const auto md = compute_moments<double>(domains);
  const auto ml = compute_moments<long double>(domains);
  for (auto k : {AugmentationKind::kUnaugmented, AugmentationKind::kTargeted}) {
    const auto td = population_estimator(md, c, k);
    const auto tl = population_estimator(ml, c, k);
    EXPECT_NEAR(static_cast<double>(analytic_ood_risk(tl, c)), analytic_ood_risk(td, c), 1e-12);
    EXPECT_NEAR(static_cast<double>(spectral_excess_ood(k, ml, c)), spectral_excess_ood(k, md, c),
                1e-12);
  }
  EXPECT_NEAR(static_cast<double>(oracle_ood_risk<long double>(c)), oracle_ood_risk(c), 1e-15);
}

TEST(SpectralExcess, MatchesAnalyticExcess) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const GeneratorConfig c = small_config(s, {2, 3, 3 + static_cast<Index>(s % 3), 5});
    const Index D = 1 + static_cast<Index>(s);
    const DomainMoment m = compute_moments(sample_domains(c, D, s + 100));
    for (auto k : kKinds) {
      const double analytic =
          analytic_ood_risk(population_estimator(m, c, k), c) - oracle_ood_risk(c);
      const double spectral = spectral_excess_ood(k, m, c);
      EXPECT_NEAR(spectral, analytic, 1e-8 * std::abs(analytic)) << "seed " << s;
    }
  }
}

TEST(SpectralExcess, SyntheticMomentEqualToT) {
  const GeneratorConfig c = small_config(2);
  DomainMoment m;
  m.num_domains = 50;
  m.full = c.tau_core_sq * Eigen::MatrixXd::Identity(c.d_dom(), c.d_dom());
  m.core = c.tau_core_sq * Eigen::MatrixXd::Identity(c.dims.core, c.dims.core);
  EXPECT_NEAR(spectral_excess_ood(AugmentationKind::kUnaugmented, m, c), 0.0, 1e-15);
  EXPECT_NEAR(spectral_excess_ood(AugmentationKind::kTargeted, m, c), 0.0, 1e-15);
}

TEST(SpectralExcess, ZeroMoment) {
  const GeneratorConfig c = small_config(2);
  DomainMoment m;
  m.full = Eigen::MatrixXd::Zero(c.d_dom(), c.d_dom());
  m.core = Eigen::MatrixXd::Zero(c.dims.core, c.dims.core);
  const double g = c.gamma_sq();
  const double expected = c.tau_core_sq * g / (1.0 + g) * c.theta_star.core().squaredNorm();
  EXPECT_NEAR(spectral_excess_ood(AugmentationKind::kUnaugmented, m, c), expected, 1e-12);
  EXPECT_NEAR(expected, 1.0 / 1.1, 1e-12);
}

TEST(SpectralExcess, RequiresSharedScalesForUnaugmented) {
  GeneratorConfig c = small_config(2);
  c.tau_spu_sq = 3.0;
  const DomainMoment m = compute_moments(sample_domains(c, 3, 1));
  EXPECT_THROW(spectral_excess_ood(AugmentationKind::kUnaugmented, m, c), ArgumentError);
  EXPECT_NO_THROW(spectral_excess_ood(AugmentationKind::kTargeted, m, c));
}

TEST(SpectralWeight, Values) {
  EXPECT_DOUBLE_EQ(spectral_weight(1.0, 0.1, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(spectral_weight(0.0, 0.1, 1.0), 1.0 / 1.1);
  EXPECT_NEAR(spectral_weight(1e-9, 0.1, 1.0), 1.0 / 1.1, 1e-6);
  EXPECT_NEAR(spectral_weight(2.0, 0.1, 1.0), 0.01 * 1.0 / (1.1 * 2.1 * 2.1), 1e-15);
}

TEST(EigenvectorSymmetry, SquaredProjectionsAreUniform) {
  // D < d_dom with a small attribute dimension so 2000 eigendecompositions stay cheap.
  const GeneratorConfig c = small_config(1, {1, 1, 5, 15});
  const Index d_dom = c.d_dom();
  const Index D = 10;
  const Eigen::VectorXd theta = Eigen::VectorXd::Unit(d_dom, 2);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(d_dom);
  const int redraws = 2000;
  for (int r = 0; r < redraws; ++r) {
    const DomainMoment m = compute_moments(sample_domains(c, D, static_cast<std::uint64_t>(r)));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.full);
    acc += (eig.eigenvectors().transpose() * theta).cwiseAbs2();
  }
  acc /= redraws;
  for (Index i = d_dom - D; i < d_dom; ++i) {
    EXPECT_NEAR(acc(i), 1.0 / static_cast<double>(d_dom), 0.1 / static_cast<double>(d_dom))
        << "eigenvector " << i;
  }
  EXPECT_NEAR(acc.sum(), 1.0, 1e-9);
}

TEST(MonteCarlo, OracleMatchesAnalytic) {
  const GeneratorConfig c = default_config(0);
  const MonteCarloRisk r = monte_carlo_risk(oracle_model(c), c, 1000, 100, 5);
  EXPECT_EQ(r.num_domains, 1000);
  EXPECT_EQ(r.num_samples, 100000);
  EXPECT_LE(std::abs(r.mse - kOracleRisk), 3.0 * r.mse_stderr);
  EXPECT_NEAR(r.rmse * r.rmse, r.mse, 1e-12);
}

TEST(MonteCarlo, ZeroModelNoiseFloor) {
  GeneratorConfig c = small_config(1);
  c.theta_star.values().setZero();
  const MonteCarloRisk r = monte_carlo_risk(LinearModel(c.dims), c, 1000, 100, 6);
  EXPECT_LE(std::abs(r.rmse - 0.1), 3.0 * r.stderr);
}

TEST(MonteCarlo, AgreesWithAnalyticForEveryStrategy) {
  const GeneratorConfig c = default_config(1);
  for (Index D : {10, 100, 500}) {
    const DomainMoment m = compute_moments(sample_domains(c, D, 7));
    std::vector<LinearModel> models;
    for (auto k : kKinds) models.push_back(population_estimator(m, c, k));
    const auto risks = monte_carlo_risks(models, c, 1000, 100, 8 + static_cast<std::uint64_t>(D));
    for (std::size_t i = 0; i < models.size(); ++i) {
      const double analytic = analytic_ood_risk(models[i], c);
      EXPECT_LE(std::abs(risks[i].mse - analytic), 3.0 * risks[i].mse_stderr)
          << "D=" << D << " strategy " << strategy_name(kKinds[i]);
      EXPECT_GE(risks[i].mse, oracle_ood_risk(c) - 3.0 * risks[i].mse_stderr);
    }
  }
}

TEST(MonteCarlo, TrainDomainsReproduceIdRisk) {
  const GeneratorConfig c = small_config(3);
  const auto domains = sample_domains(c, 20, 1);
  const DomainMoment m = compute_moments(domains);
  const LinearModel model = population_estimator(m, c, AugmentationKind::kTargeted);
  const std::vector<LinearModel> models{model};
  const MonteCarloRisk r = empirical_risks(models, c, domains, 200000, 4).front();
  EXPECT_LE(std::abs(r.mse - analytic_id_risk(model, m, c)), 3.0 * r.mse_stderr + 1e-3);
}

TEST(MonteCarlo, SharedDrawsAndDeterminism) {
  const GeneratorConfig c = small_config(3);
  const LinearModel o = oracle_model(c);
  const std::vector<LinearModel> models{o, c.theta_star, o};
  const auto a = monte_carlo_risks(models, c, 50, 20, 1);
  EXPECT_EQ(a[0].mse, a[2].mse);
  EXPECT_EQ(a[0].mse, monte_carlo_risk(o, c, 50, 20, 1).mse);
  EXPECT_NE(a[0].mse, monte_carlo_risk(o, c, 50, 20, 2).mse);
}

TEST(RiskReport, Fields) {
  const GeneratorConfig c = small_config(3);
  const DomainMoment m = compute_moments(sample_domains(c, 6, 1));
  const LinearModel t = population_estimator(m, c, AugmentationKind::kUnaugmented);
  const RiskReport r = analytic_risk_report(t, m, c, "analytic");
  EXPECT_EQ(r.method, "analytic");
  EXPECT_EQ(r.num_domains, 6);
  EXPECT_DOUBLE_EQ(r.ood_risk, analytic_ood_risk(t, c));
  EXPECT_DOUBLE_EQ(r.id_risk, analytic_id_risk(t, m, c));
  EXPECT_NEAR(r.excess_ood, r.ood_risk - oracle_ood_risk(c), 1e-15);
  EXPECT_GE(r.excess_ood, -1e-8);
}
