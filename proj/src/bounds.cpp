#include "dgsim/bounds.hpp"

#include <cmath>

#include "dgsim/errors.hpp"

namespace dgsim {

BoundQuery BoundQuery::from_config(const GeneratorConfig& config, Index num_domains) {
  BoundQuery q;
  q.gamma_sq = config.gamma_sq();
  q.tau_sq = config.tau_core_sq;
  q.theta_core_norm_sq = config.theta_star.core().squaredNorm();
  q.d_core = config.dims.core;
  q.d_dom = config.d_dom();
  q.num_domains = num_domains;
  return q;
}

void BoundQuery::validate() const {
  if (!(gamma_sq > 0.0)) throw ArgumentError("gamma_sq must be positive");
  if (!(tau_sq > 0.0)) throw ArgumentError("tau_sq must be positive");
  if (!(theta_core_norm_sq >= 0.0)) throw ArgumentError("theta_core_norm_sq must be nonnegative");
  if (d_core < 0 || d_dom < d_core || d_dom < 1) throw ArgumentError("need 0 <= d_core <= d_dom");
  if (num_domains < 1) throw ArgumentError("num_domains must be at least 1");
  if (r && !(*r > 0.0 && *r < 1.0)) throw ArgumentError("r must lie in (0, 1)");
  if (!(r0 > 0.0 && r0 <= 1.0)) throw ArgumentError("r0 must lie in (0, 1]");
  if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("delta must lie in (0, 1)");
}

double excess_scale(const BoundQuery& q) {
  return q.tau_sq * q.gamma_sq * q.theta_core_norm_sq / (1.0 + q.gamma_sq);
}

double lower_bound_formula(const BoundQuery& q) {
  q.validate();
  return excess_scale(q) *
         (1.0 - static_cast<double>(q.num_domains) / static_cast<double>(q.d_dom));
}

std::optional<double> lower_bound_unaugmented(const BoundQuery& q) {
  q.validate();
  if (q.num_domains >= q.d_dom) return std::nullopt;
  return lower_bound_formula(q);
}

TargetedUpperBounds upper_bound_targeted(const BoundQuery& q) {
  q.validate();
  TargetedUpperBounds out;
  if (!(q.gamma_sq > 1.0) || q.d_core < 1) return out;
  const double D = static_cast<double>(q.num_domains);
  const double dc = static_cast<double>(q.d_core);
  const double g = q.gamma_sq;
  const double scale = excess_scale(q);

  const double eta_sq = 2.0 * (dc + 2.0) * std::log(4.0 * D * dc / q.r0) / D;
  if (eta_sq < 1.0) {
    const double eta = std::sqrt(std::max(eta_sq, 0.0));
    const double den = 1.0 + g * (1.0 - eta);
    out.general = scale * (q.r0 / D + eta_sq / (den * den));
  }

  const double r = q.r_or_default();
  if (r > 0.0 && r < 1.0) {
    const double log_term = std::log(4.0 * D * dc);
    if (D > 2.0 * (dc + 2.0) * log_term / ((1.0 - r) * (1.0 - r))) {
      const double den = 1.0 + g * r;
      out.simple = scale * (1.0 / D + 2.0 * log_term * (dc + 2.0) / (D * den * den));
    }
  }
  return out;
}

double invariant_excess_exact(const BoundQuery& q) {
  q.validate();
  return excess_scale(q);
}

namespace {

double gamma_ratio(double g) { return g * g / ((g - 1.0) * (g - 1.0)); }

}  // namespace

bool gap_dcore_condition(const BoundQuery& q) {
  q.validate();
  if (!(q.gamma_sq > 1.0)) return false;
  const double d = static_cast<double>(q.d_dom);
  return static_cast<double>(q.d_core) <
         d / (std::log(2.0 * d) * 4.0 * (1.0 + gamma_ratio(q.gamma_sq)));
}

std::optional<GapWindow> gap_window(const BoundQuery& q) {
  if (!gap_dcore_condition(q)) return std::nullopt;
  const double d = static_cast<double>(q.d_dom);
  const double base = (static_cast<double>(q.d_core) + 2.0) * std::log(2.0 * d);
  GapWindow w{4.0 * gamma_ratio(q.gamma_sq) * base, d - 4.0 * base};
  if (!(w.d_min < w.d_max)) return std::nullopt;
  return w;
}

EigenvalueEnvelope eigenvalue_envelope(Index d_core, Index num_domains, double tau_sq,
                                       double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("delta must lie in (0, 1)");
  if (d_core < 1 || num_domains < 1) throw ArgumentError("d_core and D must be at least 1");
  const double dc = static_cast<double>(d_core);
  EigenvalueEnvelope e;
  e.eta = std::sqrt(-2.0 * (dc + 2.0) * std::log(delta / (4.0 * dc)) /
                    static_cast<double>(num_domains));
  e.lambda_min_lb = tau_sq * (1.0 - e.eta);
  e.lambda_max_ub = tau_sq * (1.0 + e.eta + e.eta * e.eta);
  return e;
}

GapPolynomialCheck gap_polynomial_check(double num_domains, double d_core, double d_dom) {
  const double D = num_domains;
  const double d = d_dom;
  const double dc = d_core;
  GapPolynomialCheck c;
  c.preconditions = 1.0 < std::log(2.0 * d) * (dc + 2.0) && D * d > 1.0 && dc <= d && dc >= 1.0;
  c.lhs = 1.0 - D / d - (2.0 + std::log(4.0 * d * dc) * (dc + 2.0)) / (2.0 * D);
  c.rhs = -(D - d / 2.0) * (D - d / 2.0) + d * d / 4.0 - 2.0 * d * (dc + 2.0) * std::log(2.0 * d);
  c.stated = c.lhs > c.rhs;
  c.scaled = D * d * c.lhs > c.rhs;
  return c;
}

BoundReport bound_report(const BoundQuery& q) {
  q.validate();
  BoundReport rep;
  rep.num_domains = q.num_domains;
  rep.lower_unaug = lower_bound_unaugmented(q);
  const auto upper = upper_bound_targeted(q);
  rep.upper_tgt_general = upper.general;
  rep.upper_tgt_simple = upper.simple;
  rep.invariant_exact = invariant_excess_exact(q);
  rep.gap_window = gap_window(q);
  rep.conditions_met = {
      {"d_below_ddom", q.num_domains < q.d_dom},
      {"gamma_sq_above_1", q.gamma_sq > 1.0},
      {"general_sample_size", upper.general.has_value()},
      {"simple_sample_size", upper.simple.has_value()},
      {"gap_dcore_small", gap_dcore_condition(q)},
      {"gap_window_nonempty", rep.gap_window.has_value()},
  };
  return rep;
}

}  // namespace dgsim
