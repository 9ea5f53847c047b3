#ifndef DGSIM_SWEEP_HPP
#define DGSIM_SWEEP_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dgsim/estimators.hpp"
#include "dgsim/bounds.hpp"
#include "dgsim/config.hpp"

namespace dgsim {

inline constexpr const char* kVersion = "0.1.0";

enum class SweepMode { kFiniteSample, kPopulation };

std::string_view sweep_mode_name(SweepMode mode);
SweepMode parse_sweep_mode(std::string_view name);

struct SweepSpec {
  GeneratorConfig base_config = default_config();
  /// When false, every seed draws its own theta* from that seed.
  bool fixed_theta_star = false;
  std::vector<Index> domain_counts{5, 10, 20, 50, 100, 200, 500, 1000};
  Index total_samples = 100000;
  std::vector<AugmentationStrategy> strategies{
      {AugmentationKind::kUnaugmented, 5},
      {AugmentationKind::kOffTheShelf, 5},
      {AugmentationKind::kDomainInvariant, 5},
      {AugmentationKind::kTargeted, 5},
  };
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<double> penalty_grid = default_penalty_grid();
  Index mc_test_domains = 1000;
  Index mc_samples_per_domain = 100;
  SweepMode mode = SweepMode::kFiniteSample;
  double validation_fraction = 0.1;
  double id_test_fraction = 0.2;
  std::optional<double> bound_r;
  double bound_r0 = 1.0;
  double bound_delta = 0.1;

  /// Throws ConfigError.
  void validate() const;
  GeneratorConfig config_for_seed(std::uint64_t seed) const;
  BoundQuery bound_query(const GeneratorConfig& config, Index num_domains) const;
};

nlohmann::json to_json(const SweepSpec& spec);
/// Missing keys take the SweepSpec defaults.
SweepSpec sweep_spec_from_json(const nlohmann::json& j);
SweepSpec load_sweep_spec(const std::filesystem::path& path);

/// One (D, strategy, seed) cell. Risk columns are empty when a cell failed or
/// when the mode does not produce them.
struct SweepRow {
  Index num_domains = 0;
  Index total_samples = 0;
  AugmentationStrategy strategy;
  std::uint64_t seed = 0;
  std::optional<double> penalty;
  std::optional<double> id_rmse;
  std::optional<double> id_rmse_stderr;
  std::optional<double> ood_rmse;
  std::optional<double> ood_rmse_stderr;
  std::optional<double> analytic_ood;
  std::optional<double> analytic_id;
  std::optional<double> spectral_excess;
  std::optional<double> excess_ood;
  double oracle_ood = 0.0;
  std::optional<double> lower_unaug;
  std::optional<double> upper_tgt_general;
  std::optional<double> upper_tgt_simple;
  double invariant_exact = 0.0;
  bool in_gap_window = false;
  std::string error;  // empty on success; never contains commas or newlines

  bool ok() const { return error.empty(); }
  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

/// Rows for every strategy in `strategies` at one (D, seed). All strategies
/// share the base sample, the validation split and the test sets; augmentation
/// streams are keyed by strategy kind, so each row is the same whatever other
/// strategies are requested.
std::vector<SweepRow> run_group(const SweepSpec& spec, Index num_domains, std::uint64_t seed,
                                std::span<const AugmentationStrategy> strategies);

SweepRow run_cell(const SweepSpec& spec, Index num_domains, const AugmentationStrategy& strategy,
                  std::uint64_t seed);

using SweepProgress = std::function<void(Index done, Index total)>;

/// All cells ordered by (D, strategy, seed), with D and strategy in spec
/// order. Output does not depend on `parallelism`.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, Index parallelism,
                                const SweepProgress& progress = {});

std::vector<BoundReport> bound_curves(const SweepSpec& spec);

void write_results_csv(std::span<const SweepRow> rows, const std::filesystem::path& path);
std::vector<SweepRow> read_results_csv(const std::filesystem::path& path);
void write_bounds_csv(std::span<const BoundReport> curves, const std::filesystem::path& path);
nlohmann::json sweep_metadata(const SweepSpec& spec);

/// Writes results.csv, bounds.csv and metadata.json under `out_dir`.
void emit_results(std::span<const SweepRow> rows, std::span<const BoundReport> curves,
                  const SweepSpec& spec, const std::filesystem::path& out_dir);

}  // namespace dgsim

#endif  // DGSIM_SWEEP_HPP
