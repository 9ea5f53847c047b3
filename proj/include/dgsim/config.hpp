#ifndef DGSIM_CONFIG_HPP
#define DGSIM_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "dgsim/types.hpp"

namespace dgsim {

/// Distributional parameters of the linear-Gaussian domain setting.
///
/// Domain attributes are mu_core ~ N(0, tau_core_sq I), mu_spu ~ N(0, tau_spu_sq I).
/// Within a domain, x_obj and x_noise are standard normal and x_core, x_spu are
/// centered on the attributes with variances sigma_core_sq, sigma_spu_sq.
/// Labels are y = <theta_obj, x_obj> + <theta_core, mu_core> + N(0, sigma_y_sq).
struct GeneratorConfig {
  BlockLayout dims{5, 500, 5, 500};
  double sigma_core_sq = 0.1;
  double tau_core_sq = 1.0;
  double sigma_spu_sq = 0.1;
  double tau_spu_sq = 1.0;
  double sigma_y_sq = 0.01;
  LinearModel theta_star;
  std::uint64_t seed = 0;

  /// tau_core_sq / sigma_core_sq
  double gamma_sq() const { return tau_core_sq / sigma_core_sq; }
  Index d_dom() const { return dims.domain_size(); }

  /// Throws ConfigError on any violated invariant.
  void validate() const;
};

/// theta_obj and theta_core drawn uniformly on their unit spheres (a block of
/// size zero stays empty); noise and spu blocks are zero.
LinearModel draw_theta_star(const BlockLayout& dims, std::uint64_t seed);

/// The simulation configuration: sigma^2 = 0.1, tau^2 = 1, d_core = 5,
/// d_spu = d_noise = 500, d_obj = 5, sigma_y^2 = 0.01, theta* drawn from `seed`.
GeneratorConfig default_config(std::uint64_t seed = 0);

/// Same scales and theta* as `config`, different block sizes. theta* is
/// redrawn from config.seed when the layout changes.
GeneratorConfig with_dims(const GeneratorConfig& config, const BlockLayout& dims);

nlohmann::json to_json(const GeneratorConfig& config);
/// Missing keys take the defaults of default_config(); a missing theta_star is
/// drawn from the config seed.
GeneratorConfig generator_config_from_json(const nlohmann::json& j);

void save_config(const GeneratorConfig& config, const std::filesystem::path& path);
GeneratorConfig load_config(const std::filesystem::path& path);

}  // namespace dgsim

#endif  // DGSIM_CONFIG_HPP
