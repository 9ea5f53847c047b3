#ifndef DGSIM_ESTIMATORS_HPP
#define DGSIM_ESTIMATORS_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "dgsim/augment.hpp"
#include "dgsim/datagen.hpp"

namespace dgsim {

/// Empirical second moment of the domain attributes mu_d = [mu_core, mu_spu].
template <typename Scalar>
struct BasicDomainMoment {
  MatrixX<Scalar> full;  // (1/D) sum_d mu_d mu_d^T, d_dom x d_dom
  MatrixX<Scalar> core;  // same sum over mu_core alone, d_core x d_core
  Index num_domains = 0;
};

using DomainMoment = BasicDomainMoment<double>;

template <typename Scalar = double>
BasicDomainMoment<Scalar> compute_moments(std::span<const DomainAttributes> domains) {
  if (domains.empty()) throw ArgumentError("compute_moments: empty domain list");
  const Index dc = domains.front().mu_core.size();
  const Index ds = domains.front().mu_spu.size();
  const auto D = static_cast<Index>(domains.size());
  MatrixX<Scalar> mu(dc + ds, D);
  for (Index d = 0; d < D; ++d) {
    const auto& dom = domains[static_cast<std::size_t>(d)];
    if (dom.mu_core.size() != dc || dom.mu_spu.size() != ds) {
      throw ArgumentError("compute_moments: inconsistent attribute dimensions");
    }
    mu.col(d).head(dc) = dom.mu_core.template cast<Scalar>();
    mu.col(d).tail(ds) = dom.mu_spu.template cast<Scalar>();
  }
  const Scalar inv_d = Scalar(1) / static_cast<Scalar>(D);
  BasicDomainMoment<Scalar> m;
  m.num_domains = D;
  m.full = MatrixX<Scalar>::Zero(dc + ds, dc + ds);
  m.full.template selfadjointView<Eigen::Lower>().rankUpdate(mu, inv_d);
  m.full = m.full.template selfadjointView<Eigen::Lower>();
  m.core = MatrixX<Scalar>::Zero(dc, dc);
  m.core.template selfadjointView<Eigen::Lower>().rankUpdate(mu.topRows(dc), inv_d);
  m.core = m.core.template selfadjointView<Eigen::Lower>();
  return m;
}

namespace detail {

template <typename Scalar>
void check_moment_dims(const BasicDomainMoment<Scalar>& m, const BlockLayout& L) {
  if (m.full.rows() != L.domain_size() || m.full.cols() != L.domain_size() ||
      m.core.rows() != L.core || m.core.cols() != L.core) {
    throw ArgumentError("domain moment dimensions do not match the config");
  }
}

/// diag(Sigma) over [core, spu].
template <typename Scalar>
VectorX<Scalar> feature_noise_diagonal(const GeneratorConfig& c) {
  VectorX<Scalar> s(c.dims.domain_size());
  s.head(c.dims.core).setConstant(static_cast<Scalar>(c.sigma_core_sq));
  s.tail(c.dims.spu).setConstant(static_cast<Scalar>(c.sigma_spu_sq));
  return s;
}

/// diag(T) over [core, spu].
template <typename Scalar>
VectorX<Scalar> attribute_diagonal(const GeneratorConfig& c) {
  VectorX<Scalar> t(c.dims.domain_size());
  t.head(c.dims.core).setConstant(static_cast<Scalar>(c.tau_core_sq));
  t.tail(c.dims.spu).setConstant(static_cast<Scalar>(c.tau_spu_sq));
  return t;
}

template <typename Scalar, typename Rhs>
VectorX<Scalar> spd_solve(const MatrixX<Scalar>& a, const Rhs& rhs) {
  Eigen::LLT<MatrixX<Scalar>> llt(a);
  if (llt.info() != Eigen::Success) throw NumericalError("population normal equations are singular");
  return llt.solve(rhs);
}

}  // namespace detail

/// Infinite-data least-squares solution under each augmentation strategy.
///
/// The obj and noise blocks equal theta* for every strategy. On the
/// domain-dependent blocks:
///   none, shelf: (Sigma + M)^-1 M theta*_dom
///   targeted:    core = (sigma_core^2 I + M_core)^-1 M_core theta*_core, spu = 0
///   invariant:   0
template <typename Scalar>
BasicLinearModel<Scalar> population_estimator(const BasicDomainMoment<Scalar>& m,
                                              const GeneratorConfig& c, AugmentationKind kind) {
  detail::check_moment_dims(m, c.dims);
  BasicLinearModel<Scalar> theta(c.dims);
  theta.obj() = c.theta_star.obj().template cast<Scalar>();
  theta.noise() = c.theta_star.noise().template cast<Scalar>();
  switch (kind) {
    case AugmentationKind::kUnaugmented:
    case AugmentationKind::kOffTheShelf: {
      MatrixX<Scalar> a = m.full;
      a.diagonal() += detail::feature_noise_diagonal<Scalar>(c);
      const VectorX<Scalar> star = c.theta_star.domain().template cast<Scalar>();
      theta.domain() = detail::spd_solve<Scalar>(a, m.full * star);
      break;
    }
    case AugmentationKind::kTargeted: {
      MatrixX<Scalar> a = m.core;
      a.diagonal().array() += static_cast<Scalar>(c.sigma_core_sq);
      const VectorX<Scalar> star = c.theta_star.core().template cast<Scalar>();
      theta.core() = detail::spd_solve<Scalar>(a, m.core * star);
      break;
    }
    case AugmentationKind::kDomainInvariant:
      break;
  }
  return theta;
}

/// Minimizer of the OOD risk: (Sigma + T)^-1 T theta* on the domain blocks.
template <typename Scalar = double>
BasicLinearModel<Scalar> oracle_model(const GeneratorConfig& c) {
  BasicLinearModel<Scalar> theta(c.dims);
  theta.obj() = c.theta_star.obj().template cast<Scalar>();
  theta.noise() = c.theta_star.noise().template cast<Scalar>();
  const VectorX<Scalar> s = detail::feature_noise_diagonal<Scalar>(c);
  const VectorX<Scalar> t = detail::attribute_diagonal<Scalar>(c);
  theta.domain() = (t.array() / (s.array() + t.array())).matrix().cwiseProduct(
      c.theta_star.domain().template cast<Scalar>());
  return theta;
}

/// Row sums sum x x^T, sum x y, sum y^2 of a least-squares problem. Only the
/// lower triangle of `gram` is maintained.
struct NormalEquations {
  BlockLayout layout;
  Eigen::MatrixXd gram;
  Eigen::VectorXd moment;
  double label_energy = 0.0;
  Index count = 0;

  static NormalEquations zeros(const BlockLayout& layout);
  static NormalEquations from(const Dataset& dataset);

  void add_rows(const Eigen::Ref<const RowMatrixX<double>>& x,
                const Eigen::Ref<const Eigen::VectorXd>& y);
  /// Full symmetric (1/N) X^T X.
  Eigen::MatrixXd normalized_gram() const;
  /// (1/N) sum (y - theta^T x)^2 without revisiting the rows.
  double mse(const LinearModel& model) const;
};

/// Normal equations of `multiplicity` augmented passes over a stream of base
/// rows, without materializing the passes. Identical, up to summation order, to
/// NormalEquations::from(augment_dataset(base, strategy, seed)) when the base
/// rows are fed in order with their positions.
class AugmentedAccumulator {
 public:
  AugmentedAccumulator(const GeneratorConfig& config, const AugmentationStrategy& strategy,
                       std::uint64_t seed);

  /// `first_position` is the position of x.row(0) in the base dataset.
  void add(const Eigen::Ref<const RowMatrixX<double>>& x,
           const Eigen::Ref<const Eigen::VectorXd>& y, Index first_position);
  NormalEquations result() const;

  /// Cheaper variant when the plain normal equations of the same base rows are
  /// accumulated anyway: add_redrawn skips the kept-column statistics and
  /// result(base) takes them from `base`.
  void add_redrawn(const Eigen::Ref<const RowMatrixX<double>>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y, Index first_position);
  NormalEquations result(const NormalEquations& base) const;

 private:
  void accumulate(const Eigen::Ref<const RowMatrixX<double>>& x,
                  const Eigen::Ref<const Eigen::VectorXd>& y, Index first_position,
                  bool with_kept);
  NormalEquations assemble(const Eigen::MatrixXd& kk, const Eigen::VectorXd& bk, double yy) const;

  GeneratorConfig config_;
  AugmentationKind kind_;
  Index passes_;
  std::uint64_t seed_;
  std::vector<Index> kept_;
  ReplacedRange replaced_;
  // Statistics in the permuted column order [kept, replaced].
  Eigen::MatrixXd kk_, rk_, rr_;
  Eigen::VectorXd bk_, br_;
  double yy_ = 0.0;
  Index count_ = 0;
};

enum class SingularPolicy {
  kThrow,          // NumericalError carrying a condition estimate
  kPseudoInverse,  // eigendecomposition solve, eigenvalues below 1e-10 * max dropped
};

/// Solves (X^T X / N + penalty I) theta = X^T y / N.
LinearModel solve_ridge(const NormalEquations& ne, double penalty,
                        SingularPolicy policy = SingularPolicy::kThrow);

/// Minimizer of (1/N) sum (y - theta^T x)^2 + penalty ||theta||^2.
LinearModel ridge_fit(const Dataset& train, double penalty,
                      SingularPolicy policy = SingularPolicy::kThrow);

struct PenaltyChoice {
  double penalty = 0.0;
  LinearModel model;
  std::vector<double> validation_mse;  // aligned with the grid
};

/// Grid member with the lowest validation MSE; exact ties go to the larger penalty.
PenaltyChoice tune_penalty(const NormalEquations& train, const NormalEquations& id_val,
                           std::span<const double> grid);
PenaltyChoice tune_penalty(const Dataset& train, const Dataset& id_val,
                           std::span<const double> grid);

/// 13 log-spaced values from 1e-6 to 1e2.
std::vector<double> default_penalty_grid();

/// Rows "block,index,weight".
void write_model_csv(const LinearModel& model, const std::filesystem::path& path);
LinearModel read_model_csv(const std::filesystem::path& path);

}  // namespace dgsim

#endif  // DGSIM_ESTIMATORS_HPP
