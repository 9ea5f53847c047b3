#ifndef DGSIM_BOUNDS_HPP
#define DGSIM_BOUNDS_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dgsim/config.hpp"

namespace dgsim {

/// Scalars the excess-risk bounds depend on.
struct BoundQuery {
  double gamma_sq = 10.0;  // tau^2 / sigma^2
  double tau_sq = 1.0;
  double theta_core_norm_sq = 1.0;
  Index d_core = 5;
  Index d_dom = 505;
  Index num_domains = 1;
  std::optional<double> r;  // in (0, 1); defaults to 1 / gamma_sq
  double r0 = 1.0;          // in (0, 1]
  double delta = 0.1;       // in (0, 1)

  static BoundQuery from_config(const GeneratorConfig& config, Index num_domains);
  double r_or_default() const { return r.value_or(1.0 / gamma_sq); }
  /// Throws ArgumentError on out-of-range fields.
  void validate() const;
};

struct GapWindow {
  double d_min = 0.0;
  double d_max = 0.0;
  bool contains(double d) const { return d_min < d && d < d_max; }
};

struct NamedCondition {
  std::string name;
  bool met = false;
};

struct BoundReport {
  Index num_domains = 0;
  std::optional<double> lower_unaug;
  std::optional<double> upper_tgt_general;
  std::optional<double> upper_tgt_simple;
  double invariant_exact = 0.0;
  std::optional<GapWindow> gap_window;
  std::vector<NamedCondition> conditions_met;

  bool in_gap_window() const {
    return gap_window && gap_window->contains(static_cast<double>(num_domains));
  }
};

/// tau^2 gamma^2 ||theta*_core||^2 / (1 + gamma^2), the common prefactor.
double excess_scale(const BoundQuery& q);

/// scale * (1 - D / d_dom) for any D, without the D < d_dom requirement.
double lower_bound_formula(const BoundQuery& q);

/// Lower bound on the excess OOD risk of the unaugmented (equivalently,
/// off-the-shelf) estimator; applicable iff D < d_dom.
std::optional<double> lower_bound_unaugmented(const BoundQuery& q);

struct TargetedUpperBounds {
  std::optional<double> general;
  std::optional<double> simple;
};

/// Upper bounds on the targeted estimator's excess OOD risk. Both need
/// gamma_sq > 1 and d_core >= 1. With eta = sqrt(2 (d_core+2) log(4 D d_core / r0) / D):
///   general = scale * (r0 / D + eta^2 / (1 + gamma^2 (1 - eta))^2), when eta < 1
///   simple  = scale * (1 / D + 2 log(4 D d_core)(d_core+2) / (D (1 + gamma^2 r)^2)),
///             when D > 2 (d_core+2) log(4 D d_core) / (1 - r)^2
TargetedUpperBounds upper_bound_targeted(const BoundQuery& q);

/// Excess OOD risk of the domain-invariant estimator; constant in D.
double invariant_excess_exact(const BoundQuery& q);

/// d_core < d_dom / (log(2 d_dom) * 4 (1 + gamma^4 / (gamma^2 - 1)^2)).
bool gap_dcore_condition(const BoundQuery& q);

/// Range of D with a provable unaugmented-vs-targeted gap:
///   (4 gamma^4 / (gamma^2-1)^2 (d_core+2) log(2 d_dom), d_dom - 4 (d_core+2) log(2 d_dom)).
/// Empty when gamma_sq <= 1, when gap_dcore_condition fails, or when the
/// interval itself is empty.
std::optional<GapWindow> gap_window(const BoundQuery& q);

struct EigenvalueEnvelope {
  double eta = 0.0;
  double lambda_min_lb = 0.0;  // tau^2 (1 - eta)
  double lambda_max_ub = 0.0;  // tau^2 (1 + eta + eta^2)
};

/// With probability at least 1 - delta, the extreme eigenvalues of M_core lie
/// in the envelope; eta = sqrt(-2 (d_core+2) log(delta / (4 d_core)) / D).
EigenvalueEnvelope eigenvalue_envelope(Index d_core, Index num_domains, double tau_sq,
                                       double delta);

/// The two sides of the polynomial comparison used for the gap window:
///   lhs = 1 - D/d - (2 + log(4 d d_core)(d_core+2)) / (2D)
///   rhs = -(D - d/2)^2 + d^2/4 - 2 d (d_core+2) log(2 d)
/// `stated` is lhs > rhs. That is false for many admissible triples (the two
/// sides are on different scales); `scaled` is D d lhs > rhs, which has the
/// same sign as lhs and always holds under the preconditions.
struct GapPolynomialCheck {
  bool preconditions = false;  // 1 < log(2d)(d_core+2), D d > 1, d_core <= d
  double lhs = 0.0;
  double rhs = 0.0;
  bool stated = false;
  bool scaled = false;
};

GapPolynomialCheck gap_polynomial_check(double num_domains, double d_core, double d_dom);

BoundReport bound_report(const BoundQuery& q);

}  // namespace dgsim

#endif  // DGSIM_BOUNDS_HPP
