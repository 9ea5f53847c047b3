#include "dgsim/risk.hpp"

#include <cmath>
#include <unordered_map>

#include "dgsim/rng.hpp"

namespace dgsim {

RiskReport analytic_risk_report(const LinearModel& model, const DomainMoment& moments,
                                const GeneratorConfig& config, std::string method) {
  RiskReport r;
  r.ood_risk = analytic_ood_risk(model, config);
  r.id_risk = analytic_id_risk(model, moments, config);
  r.excess_ood = r.ood_risk - oracle_ood_risk(config);
  r.method = std::move(method);
  r.num_domains = moments.num_domains;
  return r;
}

std::vector<MonteCarloRisk> empirical_risks(std::span<const LinearModel> models,
                                            const GeneratorConfig& config,
                                            std::span<const DomainAttributes> domains,
                                            Index num_examples, std::uint64_t seed) {
  if (num_examples < 1) throw ArgumentError("empirical_risks: need at least one example");
  if (domains.empty()) throw ArgumentError("empirical_risks: empty domain list");
  const auto m = static_cast<Index>(models.size());
  const Index p = config.dims.total();
  for (const LinearModel& model : models) detail::check_model_dims(model, config);

  const auto D = static_cast<Index>(domains.size());
  std::unordered_map<int, Index> slot;
  for (Index d = 0; d < D; ++d) slot.emplace(domains[static_cast<std::size_t>(d)].id, d);
  // Per model: squared-error sum per domain. Separate buffers give every model
  // the same memory alignment and hence the same reduction order.
  std::vector<Eigen::VectorXd> sq_sum(static_cast<std::size_t>(m), Eigen::VectorXd::Zero(D));
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(D);
  Eigen::VectorXd fourth = Eigen::VectorXd::Zero(m);

  constexpr Index kChunk = 1024;
  RowMatrixX<double> x(kChunk, p);
  Eigen::VectorXd y(kChunk);
  std::vector<int> ids(kChunk);
  for (Index first = 0; first < num_examples; first += kChunk) {
    const Index n = std::min(kChunk, num_examples - first);
    generate_rows(config, domains, seed, first, x.topRows(n), y.head(n),
                  std::span<int>(ids.data(), static_cast<std::size_t>(n)));
    // One product per model, on its own aligned buffers, keeps each model's
    // numbers independent of the others.
    Eigen::MatrixXd err(n, m);
    Eigen::VectorXd prediction(n);
    for (Index j = 0; j < m; ++j) {
      prediction.noalias() = x.topRows(n) * models[static_cast<std::size_t>(j)].values();
      err.col(j) = prediction - y.head(n);
    }
    std::vector<Index> slots(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
      slots[static_cast<std::size_t>(i)] = slot.at(ids[static_cast<std::size_t>(i)]);
      counts(slots[static_cast<std::size_t>(i)]) += 1.0;
    }
    // Same scalar loop for every column, so a model's sums do not depend on its position.
    for (Index j = 0; j < m; ++j) {
      for (Index i = 0; i < n; ++i) {
        const double e2 = err(i, j) * err(i, j);
        sq_sum[static_cast<std::size_t>(j)](slots[static_cast<std::size_t>(i)]) += e2;
        fourth(j) += e2 * e2;
      }
    }
  }

  const auto total = static_cast<double>(num_examples);
  Index occupied = 0;
  for (Index d = 0; d < D; ++d) occupied += counts(d) > 0 ? 1 : 0;
  std::vector<MonteCarloRisk> out(static_cast<std::size_t>(m));
  for (Index j = 0; j < m; ++j) {
    MonteCarloRisk& r = out[static_cast<std::size_t>(j)];
    r.num_domains = occupied;
    r.num_samples = num_examples;
    const Eigen::VectorXd& per_domain = sq_sum[static_cast<std::size_t>(j)];
    r.mse = per_domain.sum() / total;
    double var = 0.0;
    if (occupied >= 2) {
      // Ratio-estimator variance with domains as clusters.
      const Eigen::ArrayXd resid = per_domain.array() - r.mse * counts.array();
      var = resid.square().sum() / (total * total) * static_cast<double>(occupied) /
            static_cast<double>(occupied - 1);
    } else if (num_examples >= 2) {
      const double second = fourth(j) / total - r.mse * r.mse;
      var = std::max(0.0, second) / (total - 1.0);
    }
    r.mse_stderr = std::sqrt(var);
    r.rmse = std::sqrt(r.mse);
    r.stderr = r.rmse > 0.0 ? r.mse_stderr / (2.0 * r.rmse) : 0.0;
  }
  return out;
}

std::vector<MonteCarloRisk> monte_carlo_risks(std::span<const LinearModel> models,
                                              const GeneratorConfig& config,
                                              Index num_test_domains, Index samples_per_domain,
                                              std::uint64_t seed) {
  if (num_test_domains < 1 || samples_per_domain < 1) {
    throw ArgumentError("monte_carlo_risk: counts must be at least 1");
  }
  const auto domains = sample_domains(config, num_test_domains, derive_seed(seed, {1}));
  return empirical_risks(models, config, domains, num_test_domains * samples_per_domain,
                         derive_seed(seed, {2}));
}

MonteCarloRisk monte_carlo_risk(const LinearModel& model, const GeneratorConfig& config,
                                Index num_test_domains, Index samples_per_domain,
                                std::uint64_t seed) {
  return monte_carlo_risks(std::span<const LinearModel>(&model, 1), config, num_test_domains,
                           samples_per_domain, seed)
      .front();
}

}  // namespace dgsim
