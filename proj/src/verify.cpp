#include "dgsim/verify.hpp"

#include <cmath>
#include <sstream>

#include "dgsim/bounds.hpp"
#include "dgsim/estimators.hpp"
#include "dgsim/risk.hpp"
#include "dgsim/rng.hpp"

namespace dgsim {

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

/// Random layout and shared scales; theta* drawn from the seed.
GeneratorConfig random_config(Rng& rng, std::uint64_t seed) {
  GeneratorConfig c;
  auto count = [&](Index lo, Index hi) {
    return lo + static_cast<Index>(uniform(rng, 0.0, static_cast<double>(hi - lo + 1)));
  };
  c.dims = BlockLayout{count(1, 5), count(0, 20), count(1, 10), count(1, 120)};
  c.sigma_core_sq = c.sigma_spu_sq = uniform(rng, 0.01, 1.0);
  c.tau_core_sq = c.tau_spu_sq = uniform(rng, 0.1, 3.0);
  c.sigma_y_sq = uniform(rng, 0.0, 0.1);
  c.seed = seed;
  c.theta_star = draw_theta_star(c.dims, seed);
  return c;
}

double relative_gap(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

VerifyCheck dual_formula(std::uint64_t seed) {
  Rng rng = make_rng(derive_seed(seed, {tag(Stream::kVerify), 1}));
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const GeneratorConfig c = random_config(rng, derive_seed(seed, {2, static_cast<std::uint64_t>(t)}));
    const Index D = 1 + static_cast<Index>(uniform(rng, 0.0, 2.0 * static_cast<double>(c.d_dom())));
    const auto domains = sample_domains(c, D, derive_seed(seed, {3, static_cast<std::uint64_t>(t)}));
    const DomainMoment m = compute_moments(domains);
    const double oracle = oracle_ood_risk(c);
    for (auto kind : {AugmentationKind::kUnaugmented, AugmentationKind::kTargeted}) {
      const double direct = analytic_ood_risk(population_estimator(m, c, kind), c) - oracle;
      worst = std::max(worst, relative_gap(spectral_excess_ood(kind, m, c), direct));
    }
  }
  return {"spectral excess equals analytic excess (100 random configs)", worst <= 1e-8, false,
          "max relative gap " + fmt(worst)};
}

VerifyCheck invariant_exactness(std::uint64_t seed) {
  const GeneratorConfig c = default_config(seed);
  double worst = 0.0;
  for (Index D : {5, 50, 500}) {
    const auto domains = sample_domains(c, D, derive_seed(seed, {4}));
    const DomainMoment m = compute_moments(domains);
    const LinearModel inv = population_estimator(m, c, AugmentationKind::kDomainInvariant);
    const double excess = analytic_ood_risk(inv, c) - oracle_ood_risk(c);
    worst = std::max(worst, std::abs(excess - invariant_excess_exact(BoundQuery::from_config(c, D))));
  }
  return {"invariant excess is constant and exact", worst <= 1e-12, false,
          "max abs gap " + fmt(worst)};
}

VerifyCheck estimator_identities(std::uint64_t seed) {
  const GeneratorConfig c = default_config(seed);
  bool ok = true;
  for (Index D : {3, 40, 700}) {
    const auto domains = sample_domains(c, D, derive_seed(seed, {5}));
    const DomainMoment m = compute_moments(domains);
    const LinearModel none = population_estimator(m, c, AugmentationKind::kUnaugmented);
    const LinearModel shelf = population_estimator(m, c, AugmentationKind::kOffTheShelf);
    const LinearModel tgt = population_estimator(m, c, AugmentationKind::kTargeted);
    ok = ok && none == shelf && tgt.spu().isZero(0.0);
    ok = ok && analytic_id_risk(none, m, c) <= analytic_id_risk(oracle_model(c), m, c) + 1e-12;
  }
  return {"none == shelf, targeted spu = 0, ID optimality", ok, false, ""};
}

VerifyCheck oracle_optimality(std::uint64_t seed) {
  const GeneratorConfig c = default_config(seed);
  const LinearModel best = oracle_model(c);
  const double base = analytic_ood_risk(best, c);
  Rng rng = make_rng(derive_seed(seed, {tag(Stream::kVerify), 6}));
  bool ok = std::abs(base - oracle_ood_risk(c)) <= 1e-12;
  for (int t = 0; t < 50 && ok; ++t) {
    Eigen::VectorXd dir(c.dims.total());
    fill_normal(rng, 1.0, dir);
    for (double sign : {-1.0, 1.0}) {
      LinearModel moved(c.dims, best.values() + sign * 0.01 * dir.normalized());
      ok = ok && analytic_ood_risk(moved, c) >= base;
    }
  }
  return {"oracle minimizes analytic OOD risk", ok, false, "oracle risk " + fmt(base)};
}

VerifyCheck bound_sanity(std::uint64_t seed) {
  const GeneratorConfig c = default_config(seed);
  bool ok = true;
  for (Index D = 1; D <= 1000000; D = D < 10 ? D + 1 : D * 3 / 2) {
    const BoundReport r = bound_report(BoundQuery::from_config(c, D));
    ok = ok && r.invariant_exact >= 0.0;
    if (r.lower_unaug) ok = ok && *r.lower_unaug >= 0.0;
    if (r.upper_tgt_general) ok = ok && *r.upper_tgt_general >= 0.0;
    if (r.upper_tgt_simple) ok = ok && *r.upper_tgt_simple >= 0.0;
    if (r.upper_tgt_general && r.upper_tgt_simple) {
      ok = ok && *r.upper_tgt_general <= *r.upper_tgt_simple;
    }
  }
  return {"bounds nonnegative, general <= simple", ok, false, ""};
}

std::pair<VerifyCheck, VerifyCheck> gap_polynomial(std::uint64_t seed) {
  Rng rng = make_rng(derive_seed(seed, {tag(Stream::kVerify), 7}));
  int tried = 0, scaled = 0, stated = 0;
  while (tried < 100) {
    const double d = std::floor(uniform(rng, 2.0, 5000.0));
    const double dc = std::floor(uniform(rng, 1.0, d + 1.0));
    const double D = std::floor(uniform(rng, 1.0, 2.0 * d));
    const auto c = gap_polynomial_check(D, dc, d);
    if (!c.preconditions) continue;
    ++tried;
    scaled += c.scaled ? 1 : 0;
    stated += c.stated ? 1 : 0;
  }
  return {{"gap polynomial, D d-scaled form (100 triples)", scaled == tried, false,
           std::to_string(scaled) + "/" + std::to_string(tried)},
          {"gap polynomial, unscaled form (100 triples)", stated == tried, true,
           std::to_string(stated) + "/" + std::to_string(tried) + " hold"}};
}

VerifyCheck monte_carlo_oracle(std::uint64_t seed) {
  const GeneratorConfig c = default_config(seed);
  const auto r = monte_carlo_risk(oracle_model(c), c, 1000, 100,
                                  derive_seed(seed, {tag(Stream::kVerify), 8}));
  const double z = std::abs(r.mse - oracle_ood_risk(c)) / r.mse_stderr;
  return {"Monte Carlo oracle risk within 3 stderr", z <= 3.0, false,
          "mse " + fmt(r.mse) + " +- " + fmt(r.mse_stderr) + " (z = " + fmt(z) + ")"};
}

}  // namespace

VerifyReport run_verification(std::uint64_t seed) {
  VerifyReport rep;
  rep.checks.push_back(dual_formula(seed));
  rep.checks.push_back(invariant_exactness(seed));
  rep.checks.push_back(estimator_identities(seed));
  rep.checks.push_back(oracle_optimality(seed));
  rep.checks.push_back(bound_sanity(seed));
  auto [scaled, stated] = gap_polynomial(seed);
  rep.checks.push_back(scaled);
  rep.checks.push_back(stated);
  rep.checks.push_back(monte_carlo_oracle(seed));
  return rep;
}

}  // namespace dgsim
