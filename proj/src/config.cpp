#include "dgsim/config.hpp"

#include <cmath>
#include <fstream>

#include "dgsim/rng.hpp"

namespace dgsim {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

std::vector<double> to_vector(const Eigen::Ref<const Eigen::VectorXd>& v) {
  return {v.data(), v.data() + v.size()};
}

void read_block(const nlohmann::json& j, const char* key, Eigen::Ref<Eigen::VectorXd> out) {
  if (!j.contains(key)) return;
  auto values = j.at(key).get<std::vector<double>>();
  if (static_cast<Index>(values.size()) != out.size()) {
    throw ConfigError(std::string("theta_star.") + key + " has " +
                      std::to_string(values.size()) + " entries, expected " +
                      std::to_string(out.size()));
  }
  out = Eigen::Map<const Eigen::VectorXd>(values.data(), out.size());
}

}  // namespace

void GeneratorConfig::validate() const {
  require(dims.obj >= 0 && dims.noise >= 0 && dims.core >= 0 && dims.spu >= 0,
          "block dimensions must be non-negative");
  require(dims.core + dims.spu >= 1, "d_core + d_spu must be at least 1");
  require(positive_finite(sigma_core_sq), "sigma_core_sq must be positive");
  require(positive_finite(tau_core_sq), "tau_core_sq must be positive");
  require(positive_finite(sigma_spu_sq), "sigma_spu_sq must be positive");
  require(positive_finite(tau_spu_sq), "tau_spu_sq must be positive");
  require(std::isfinite(sigma_y_sq) && sigma_y_sq >= 0.0, "sigma_y_sq must be non-negative");
  require(std::isfinite(gamma_sq()), "gamma_sq must be finite");
  require(theta_star.layout() == dims, "theta_star layout does not match dimensions");
  require(theta_star.values().allFinite(), "theta_star must be finite");
  require(theta_star.noise().isZero(0.0), "theta_star noise block must be zero");
  require(theta_star.spu().isZero(0.0), "theta_star spu block must be zero");
}

LinearModel draw_theta_star(const BlockLayout& dims, std::uint64_t seed) {
  LinearModel theta(dims);
  Rng rng = make_rng(derive_seed(seed, {tag(Stream::kTheta)}));
  for (Block b : {Block::kObj, Block::kCore}) {
    auto block = theta.block(b);
    if (block.size() == 0) continue;
    fill_normal(rng, 1.0, block);
    block /= block.norm();
  }
  return theta;
}

GeneratorConfig default_config(std::uint64_t seed) {
  GeneratorConfig c;
  c.seed = seed;
  c.theta_star = draw_theta_star(c.dims, seed);
  return c;
}

GeneratorConfig with_dims(const GeneratorConfig& config, const BlockLayout& dims) {
  GeneratorConfig c = config;
  c.dims = dims;
  if (!(config.dims == dims)) c.theta_star = draw_theta_star(dims, config.seed);
  return c;
}

nlohmann::json to_json(const GeneratorConfig& c) {
  nlohmann::json j;
  j["dimensions"] = {{"obj", c.dims.obj}, {"noise", c.dims.noise}, {"core", c.dims.core},
                     {"spu", c.dims.spu}};
  j["variances"] = {{"sigma_core_sq", c.sigma_core_sq}, {"tau_core_sq", c.tau_core_sq},
                    {"sigma_spu_sq", c.sigma_spu_sq},   {"tau_spu_sq", c.tau_spu_sq},
                    {"sigma_y_sq", c.sigma_y_sq}};
  j["theta_star"] = {{"obj", to_vector(c.theta_star.obj())},
                     {"core", to_vector(c.theta_star.core())}};
  j["seed"] = c.seed;
  return j;
}

GeneratorConfig generator_config_from_json(const nlohmann::json& j) {
  try {
    GeneratorConfig c = default_config(j.value("seed", std::uint64_t{0}));
    if (j.contains("dimensions")) {
      const auto& d = j.at("dimensions");
      c.dims.obj = d.value("obj", c.dims.obj);
      c.dims.noise = d.value("noise", c.dims.noise);
      c.dims.core = d.value("core", c.dims.core);
      c.dims.spu = d.value("spu", c.dims.spu);
    }
    if (j.contains("variances")) {
      const auto& v = j.at("variances");
      c.sigma_core_sq = v.value("sigma_core_sq", c.sigma_core_sq);
      c.tau_core_sq = v.value("tau_core_sq", c.tau_core_sq);
      c.sigma_spu_sq = v.value("sigma_spu_sq", c.sigma_spu_sq);
      c.tau_spu_sq = v.value("tau_spu_sq", c.tau_spu_sq);
      c.sigma_y_sq = v.value("sigma_y_sq", c.sigma_y_sq);
    }
    if (j.contains("theta_star")) {
      c.theta_star = LinearModel(c.dims);
      const auto& t = j.at("theta_star");
      read_block(t, "obj", c.theta_star.obj());
      read_block(t, "noise", c.theta_star.noise());
      read_block(t, "core", c.theta_star.core());
      read_block(t, "spu", c.theta_star.spu());
    } else {
      c.theta_star = draw_theta_star(c.dims, c.seed);
    }
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed generator config: ") + e.what());
  }
}

void save_config(const GeneratorConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_json(config).dump(2) << '\n';
}

GeneratorConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return generator_config_from_json(j);
}

}  // namespace dgsim
