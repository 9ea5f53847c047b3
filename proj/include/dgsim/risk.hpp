#ifndef DGSIM_RISK_HPP
#define DGSIM_RISK_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dgsim/estimators.hpp"

namespace dgsim {

namespace detail {

template <typename Scalar>
void check_model_dims(const BasicLinearModel<Scalar>& model, const GeneratorConfig& c) {
  if (!(model.layout() == c.dims)) throw ArgumentError("model blocks do not match config dimensions");
}

/// sigma_y^2 + ||theta_obj - theta*_obj||^2 + ||theta_noise - theta*_noise||^2
/// + theta_dom^T Sigma theta_dom, the part shared by the ID and OOD risks.
template <typename Scalar>
Scalar risk_without_attribute_term(const BasicLinearModel<Scalar>& model, const GeneratorConfig& c) {
  const VectorX<Scalar> s = feature_noise_diagonal<Scalar>(c);
  return static_cast<Scalar>(c.sigma_y_sq) +
         (model.obj() - c.theta_star.obj().template cast<Scalar>()).squaredNorm() +
         (model.noise() - c.theta_star.noise().template cast<Scalar>()).squaredNorm() +
         model.domain().cwiseAbs2().dot(s);
}

}  // namespace detail

/// Expected squared error on the meta-distribution:
/// sigma_y^2 + obj/noise mismatch + theta^T Sigma theta + (theta* - theta)^T T (theta* - theta).
template <typename Scalar>
Scalar analytic_ood_risk(const BasicLinearModel<Scalar>& model, const GeneratorConfig& c) {
  detail::check_model_dims(model, c);
  const VectorX<Scalar> t = detail::attribute_diagonal<Scalar>(c);
  const VectorX<Scalar> gap = c.theta_star.domain().template cast<Scalar>() - model.domain();
  return detail::risk_without_attribute_term(model, c) + gap.cwiseAbs2().dot(t);
}

/// Expected squared error on the training domains: T replaced by the
/// empirical moment M.
template <typename Scalar>
Scalar analytic_id_risk(const BasicLinearModel<Scalar>& model, const BasicDomainMoment<Scalar>& m,
                        const GeneratorConfig& c) {
  detail::check_model_dims(model, c);
  detail::check_moment_dims(m, c.dims);
  const VectorX<Scalar> gap = c.theta_star.domain().template cast<Scalar>() - model.domain();
  return detail::risk_without_attribute_term(model, c) + gap.dot(m.full * gap);
}

/// sigma_y^2 + tau^2 sigma^2 / (sigma^2 + tau^2) ||theta*_core||^2 (plus the
/// analogous spu term, which vanishes because theta*_spu = 0).
template <typename Scalar = double>
Scalar oracle_ood_risk(const GeneratorConfig& c) {
  auto shrink = [](double s, double t) { return static_cast<Scalar>(t) * static_cast<Scalar>(s) /
                                                (static_cast<Scalar>(s) + static_cast<Scalar>(t)); };
  return static_cast<Scalar>(c.sigma_y_sq) +
         shrink(c.sigma_core_sq, c.tau_core_sq) *
             c.theta_star.core().template cast<Scalar>().squaredNorm() +
         shrink(c.sigma_spu_sq, c.tau_spu_sq) *
             c.theta_star.spu().template cast<Scalar>().squaredNorm();
}

/// Eigenvalues at or below this are treated as the null space of M.
inline constexpr double kNullEigenvalue = 1e-10;

/// Per-eigenvalue excess weight
///   v(lambda) = sigma^4 (tau^2 - lambda)^2 / ((sigma^2 + tau^2)(lambda + sigma^2)^2),
/// and tau^4 / (sigma^2 + tau^2) on the null space (the same value at lambda = 0).
template <typename Scalar>
Scalar spectral_weight(Scalar lambda, Scalar sigma_sq, Scalar tau_sq) {
  if (lambda <= static_cast<Scalar>(kNullEigenvalue)) return tau_sq * tau_sq / (sigma_sq + tau_sq);
  const Scalar num = sigma_sq * sigma_sq * (tau_sq - lambda) * (tau_sq - lambda);
  const Scalar den = (sigma_sq + tau_sq) * (lambda + sigma_sq) * (lambda + sigma_sq);
  return num / den;
}

/// Excess OOD risk of a population estimator computed from the eigenpairs of
/// the domain moment: sum_i v(lambda_i) (u_i^T theta*)^2 over M_full for
/// none/shelf, over M_core for targeted. The invariant estimator is the
/// all-null case. none/shelf need shared core and spu scales, since the formula
/// assumes Sigma and T are multiples of the identity.
template <typename Scalar>
Scalar spectral_excess_ood(AugmentationKind kind, const BasicDomainMoment<Scalar>& m,
                           const GeneratorConfig& c) {
  detail::check_moment_dims(m, c.dims);
  auto project = [](const MatrixX<Scalar>& moment, const VectorX<Scalar>& star, Scalar sigma_sq,
                    Scalar tau_sq) {
    if (moment.rows() == 0) return Scalar(0);
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> eig(moment);
    if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition of M failed");
    const VectorX<Scalar> coords = eig.eigenvectors().transpose() * star;
    Scalar total = 0;
    for (Index i = 0; i < coords.size(); ++i) {
      total += spectral_weight(eig.eigenvalues()(i), sigma_sq, tau_sq) * coords(i) * coords(i);
    }
    return total;
  };
  const auto sc = static_cast<Scalar>(c.sigma_core_sq);
  const auto tc = static_cast<Scalar>(c.tau_core_sq);
  switch (kind) {
    case AugmentationKind::kUnaugmented:
    case AugmentationKind::kOffTheShelf:
      if (c.sigma_core_sq != c.sigma_spu_sq || c.tau_core_sq != c.tau_spu_sq) {
        throw ArgumentError("spectral excess for none/shelf needs shared core and spu variances");
      }
      return project(m.full, c.theta_star.domain().template cast<Scalar>(), sc, tc);
    case AugmentationKind::kTargeted:
      return project(m.core, c.theta_star.core().template cast<Scalar>(), sc, tc);
    case AugmentationKind::kDomainInvariant: {
      const auto ss = static_cast<Scalar>(c.sigma_spu_sq);
      const auto ts = static_cast<Scalar>(c.tau_spu_sq);
      return spectral_weight(Scalar(0), sc, tc) *
                 c.theta_star.core().template cast<Scalar>().squaredNorm() +
             spectral_weight(Scalar(0), ss, ts) *
                 c.theta_star.spu().template cast<Scalar>().squaredNorm();
    }
  }
  return Scalar(0);
}

struct RiskReport {
  double ood_risk = 0.0;
  double id_risk = 0.0;
  double excess_ood = 0.0;  // ood_risk - oracle_ood_risk
  std::string method;
  Index num_domains = 0;
};

RiskReport analytic_risk_report(const LinearModel& model, const DomainMoment& moments,
                                const GeneratorConfig& config, std::string method);

struct MonteCarloRisk {
  double rmse = 0.0;
  double stderr = 0.0;  // of the rmse, by the delta method
  double mse = 0.0;
  double mse_stderr = 0.0;
  Index num_domains = 0;
  Index num_samples = 0;
};

/// Squared-error statistics of several models on one shared sample of
/// `num_examples` rows drawn round-robin from `domains` with stream `seed`.
/// Standard errors treat domains as clusters; with a single domain they fall
/// back to the per-example variance.
std::vector<MonteCarloRisk> empirical_risks(std::span<const LinearModel> models,
                                            const GeneratorConfig& config,
                                            std::span<const DomainAttributes> domains,
                                            Index num_examples, std::uint64_t seed);

/// Fresh domains and examples from the meta-distribution; every model sees the
/// same draws.
std::vector<MonteCarloRisk> monte_carlo_risks(std::span<const LinearModel> models,
                                              const GeneratorConfig& config,
                                              Index num_test_domains, Index samples_per_domain,
                                              std::uint64_t seed);

MonteCarloRisk monte_carlo_risk(const LinearModel& model, const GeneratorConfig& config,
                                Index num_test_domains, Index samples_per_domain,
                                std::uint64_t seed);

}  // namespace dgsim

#endif  // DGSIM_RISK_HPP
