#include "dgsim/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "dgsim/errors.hpp"
#include "dgsim/io.hpp"
#include "dgsim/risk.hpp"
#include "dgsim/rng.hpp"

namespace dgsim {

std::string_view sweep_mode_name(SweepMode mode) {
  return mode == SweepMode::kPopulation ? "population" : "finite_sample";
}

SweepMode parse_sweep_mode(std::string_view name) {
  if (name == "finite_sample") return SweepMode::kFiniteSample;
  if (name == "population") return SweepMode::kPopulation;
  throw ConfigError("unknown sweep mode '" + std::string(name) + "'");
}

void SweepSpec::validate() const {
  base_config.validate();
  if (!std::is_sorted(domain_counts.begin(), domain_counts.end())) {
    throw ConfigError("domain_counts must be sorted ascending");
  }
  if (!domain_counts.empty() && domain_counts.front() < 1) {
    throw ConfigError("domain counts must be at least 1");
  }
  if (seeds.empty()) throw ConfigError("seeds must be nonempty");
  for (const auto& s : strategies) {
    if (s.multiplicity < 1) throw ConfigError("multiplicity must be at least 1");
  }
  if (mode == SweepMode::kFiniteSample) {
    if (total_samples < 2) throw ConfigError("total_samples must be at least 2");
    if (penalty_grid.empty()) throw ConfigError("penalty_grid must be nonempty");
    for (double p : penalty_grid) {
      if (!(p >= 0.0)) throw ConfigError("penalties must be nonnegative");
    }
    if (mc_test_domains < 1 || mc_samples_per_domain < 1) {
      throw ConfigError("Monte Carlo counts must be at least 1");
    }
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
      throw ConfigError("validation_fraction must lie in (0, 1)");
    }
    if (!(id_test_fraction > 0.0)) throw ConfigError("id_test_fraction must be positive");
  }
  bound_query(base_config, 1).validate();
}

GeneratorConfig SweepSpec::config_for_seed(std::uint64_t seed) const {
  GeneratorConfig c = base_config;
  c.seed = seed;
  if (!fixed_theta_star) c.theta_star = draw_theta_star(c.dims, seed);
  return c;
}

BoundQuery SweepSpec::bound_query(const GeneratorConfig& config, Index num_domains) const {
  BoundQuery q = BoundQuery::from_config(config, num_domains);
  q.r = bound_r;
  q.r0 = bound_r0;
  q.delta = bound_delta;
  return q;
}

nlohmann::json to_json(const SweepSpec& s) {
  nlohmann::json j;
  j["generator"] = to_json(s.base_config);
  if (!s.fixed_theta_star) j["generator"].erase("theta_star");
  j["domain_counts"] = s.domain_counts;
  j["total_samples"] = s.total_samples;
  j["strategies"] = nlohmann::json::array();
  for (const auto& st : s.strategies) {
    j["strategies"].push_back(
        {{"kind", std::string(strategy_name(st.kind))}, {"multiplicity", st.multiplicity}});
  }
  j["seeds"] = s.seeds;
  j["penalty_grid"] = s.penalty_grid;
  j["mc_test_domains"] = s.mc_test_domains;
  j["mc_samples_per_domain"] = s.mc_samples_per_domain;
  j["mode"] = std::string(sweep_mode_name(s.mode));
  j["validation_fraction"] = s.validation_fraction;
  j["id_test_fraction"] = s.id_test_fraction;
  j["bounds"] = {{"r0", s.bound_r0}, {"delta", s.bound_delta}};
  if (s.bound_r) j["bounds"]["r"] = *s.bound_r;
  return j;
}

SweepSpec sweep_spec_from_json(const nlohmann::json& j) {
  try {
    SweepSpec s;
    if (j.contains("generator")) {
      s.base_config = generator_config_from_json(j.at("generator"));
      s.fixed_theta_star = j.at("generator").contains("theta_star");
    }
    s.domain_counts = j.value("domain_counts", s.domain_counts);
    s.total_samples = j.value("total_samples", s.total_samples);
    const Index default_multiplicity = j.value("multiplicity", Index{5});
    if (j.contains("strategies")) {
      s.strategies.clear();
      for (const auto& e : j.at("strategies")) {
        AugmentationStrategy st;
        st.multiplicity = default_multiplicity;
        if (e.is_string()) {
          st.kind = parse_strategy(e.get<std::string>());
        } else {
          st.kind = parse_strategy(e.at("kind").get<std::string>());
          st.multiplicity = e.value("multiplicity", default_multiplicity);
        }
        s.strategies.push_back(st);
      }
    } else {
      for (auto& st : s.strategies) st.multiplicity = default_multiplicity;
    }
    s.seeds = j.value("seeds", s.seeds);
    s.penalty_grid = j.value("penalty_grid", s.penalty_grid);
    s.mc_test_domains = j.value("mc_test_domains", s.mc_test_domains);
    s.mc_samples_per_domain = j.value("mc_samples_per_domain", s.mc_samples_per_domain);
    if (j.contains("mode")) s.mode = parse_sweep_mode(j.at("mode").get<std::string>());
    s.validation_fraction = j.value("validation_fraction", s.validation_fraction);
    s.id_test_fraction = j.value("id_test_fraction", s.id_test_fraction);
    if (j.contains("bounds")) {
      const auto& b = j.at("bounds");
      if (b.contains("r")) s.bound_r = b.at("r").get<double>();
      s.bound_r0 = b.value("r0", s.bound_r0);
      s.bound_delta = b.value("delta", s.bound_delta);
    }
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed sweep spec: ") + e.what());
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("invalid sweep spec: ") + e.what());
  }
}

SweepSpec load_sweep_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return sweep_spec_from_json(j);
}

namespace {

std::string clean_message(std::string msg) {
  for (char& c : msg) {
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ' ';
  }
  return msg.empty() ? "error" : msg;
}

SweepRow row_template(const SweepSpec& spec, const GeneratorConfig& config, Index D,
                      const AugmentationStrategy& strategy, std::uint64_t seed,
                      const BoundReport& bounds) {
  SweepRow r;
  r.num_domains = D;
  r.total_samples = spec.mode == SweepMode::kFiniteSample ? spec.total_samples : 0;
  r.strategy = strategy;
  r.seed = seed;
  r.oracle_ood = oracle_ood_risk(config);
  r.lower_unaug = bounds.lower_unaug;
  r.upper_tgt_general = bounds.upper_tgt_general;
  r.upper_tgt_simple = bounds.upper_tgt_simple;
  r.invariant_exact = bounds.invariant_exact;
  r.in_gap_window = bounds.in_gap_window();
  return r;
}

void run_population(const GeneratorConfig& config, std::span<const DomainAttributes> domains,
                    std::span<const AugmentationStrategy> strategies, std::vector<SweepRow>& rows) {
  const DomainMoment m = compute_moments(domains);
  for (std::size_t i = 0; i < strategies.size(); ++i) {
    SweepRow& row = rows[i];
    try {
      const AugmentationKind kind = strategies[i].kind;
      const LinearModel theta = population_estimator(m, config, kind);
      row.analytic_ood = analytic_ood_risk(theta, config);
      row.analytic_id = analytic_id_risk(theta, m, config);
      row.excess_ood = *row.analytic_ood - row.oracle_ood;
      row.ood_rmse = std::sqrt(*row.analytic_ood);
      row.id_rmse = std::sqrt(*row.analytic_id);
      try {
        row.spectral_excess = spectral_excess_ood(kind, m, config);
      } catch (const ArgumentError&) {
        // Unshared core/spu scales: only the analytic form is available.
      }
    } catch (const std::exception& e) {
      row.error = clean_message(e.what());
    }
  }
}

void run_finite_sample(const SweepSpec& spec, const GeneratorConfig& config,
                       std::span<const DomainAttributes> domains, std::uint64_t seed,
                       std::span<const AugmentationStrategy> strategies,
                       std::vector<SweepRow>& rows) {
  const auto D = static_cast<Index>(domains.size());
  const Index N = spec.total_samples;
  const auto uD = static_cast<std::uint64_t>(D);
  const std::uint64_t example_seed = derive_seed(seed, {tag(Stream::kExamples), uD});

  std::vector<int> ids(static_cast<std::size_t>(N));
  for (Index i = 0; i < N; ++i) ids[static_cast<std::size_t>(i)] = domains[static_cast<std::size_t>(i % D)].id;
  const auto [train_idx, val_idx] =
      split_indices(ids, spec.validation_fraction, derive_seed(seed, {tag(Stream::kSplit), uD}));
  std::vector<char> is_val(static_cast<std::size_t>(N), 0);
  for (Index i : val_idx) is_val[static_cast<std::size_t>(i)] = 1;

  std::vector<AugmentedAccumulator> acc;
  acc.reserve(strategies.size());
  for (const auto& st : strategies) {
    acc.emplace_back(config, st,
                     derive_seed(seed, {tag(Stream::kAugment), uD,
                                        static_cast<std::uint64_t>(st.kind)}));
  }
  NormalEquations base = NormalEquations::zeros(config.dims);
  NormalEquations val = NormalEquations::zeros(config.dims);

  constexpr Index kChunk = 1024;
  const Index p = config.dims.total();
  RowMatrixX<double> x(kChunk, p);
  Eigen::VectorXd y(kChunk);
  std::vector<int> chunk_ids(kChunk);
  std::vector<Index> tr, va;
  Index train_position = 0;
  for (Index first = 0; first < N; first += kChunk) {
    const Index n = std::min(kChunk, N - first);
    generate_rows(config, domains, example_seed, first, x.topRows(n), y.head(n),
                  std::span<int>(chunk_ids.data(), static_cast<std::size_t>(n)));
    tr.clear();
    va.clear();
    for (Index i = 0; i < n; ++i) (is_val[static_cast<std::size_t>(first + i)] ? va : tr).push_back(i);
    if (!va.empty()) {
      const RowMatrixX<double> xv = x(va, Eigen::all);
      const Eigen::VectorXd yv = y(va);
      val.add_rows(xv, yv);
    }
    if (!tr.empty()) {
      const RowMatrixX<double> xt = x(tr, Eigen::all);
      const Eigen::VectorXd yt = y(tr);
      base.add_rows(xt, yt);
      for (auto& a : acc) a.add_redrawn(xt, yt, train_position);
      train_position += static_cast<Index>(tr.size());
    }
  }

  std::vector<LinearModel> models;
  std::vector<std::size_t> fitted;
  for (std::size_t i = 0; i < strategies.size(); ++i) {
    try {
      const PenaltyChoice choice = tune_penalty(acc[i].result(base), val, spec.penalty_grid);
      rows[i].penalty = choice.penalty;
      models.push_back(choice.model);
      fitted.push_back(i);
    } catch (const std::exception& e) {
      rows[i].error = clean_message(e.what());
    }
  }
  if (models.empty()) return;

  const Index id_n =
      std::max<Index>(1, std::llround(spec.id_test_fraction * static_cast<double>(N)));
  const auto id = empirical_risks(models, config, domains, id_n,
                                  derive_seed(seed, {tag(Stream::kIdTest), uD}));
  const auto ood = monte_carlo_risks(models, config, spec.mc_test_domains,
                                     spec.mc_samples_per_domain,
                                     derive_seed(seed, {tag(Stream::kOodTest)}));
  const DomainMoment m = compute_moments(domains);
  for (std::size_t k = 0; k < fitted.size(); ++k) {
    SweepRow& row = rows[fitted[k]];
    row.id_rmse = id[k].rmse;
    row.id_rmse_stderr = id[k].stderr;
    row.ood_rmse = ood[k].rmse;
    row.ood_rmse_stderr = ood[k].stderr;
    row.analytic_ood = analytic_ood_risk(models[k], config);
    row.analytic_id = analytic_id_risk(models[k], m, config);
    row.excess_ood = *row.analytic_ood - row.oracle_ood;
  }
}

}  // namespace

std::vector<SweepRow> run_group(const SweepSpec& spec, Index num_domains, std::uint64_t seed,
                                std::span<const AugmentationStrategy> strategies) {
  if (num_domains < 1) throw ArgumentError("run_cell: D must be at least 1");
  const GeneratorConfig config = spec.config_for_seed(seed);
  const BoundReport bounds = bound_report(spec.bound_query(config, num_domains));
  std::vector<SweepRow> rows;
  for (const auto& st : strategies) {
    rows.push_back(row_template(spec, config, num_domains, st, seed, bounds));
  }
  if (strategies.empty()) return rows;
  try {
    const auto domains =
        sample_domains(config, num_domains, derive_seed(seed, {tag(Stream::kDomains)}));
    if (spec.mode == SweepMode::kPopulation) {
      run_population(config, domains, strategies, rows);
    } else {
      run_finite_sample(spec, config, domains, seed, strategies, rows);
    }
  } catch (const std::exception& e) {
    const std::string msg = clean_message(e.what());
    for (auto& r : rows) {
      const SweepRow blank = row_template(spec, config, num_domains, r.strategy, seed, bounds);
      r = blank;
      r.error = msg;
    }
  }
  return rows;
}

SweepRow run_cell(const SweepSpec& spec, Index num_domains, const AugmentationStrategy& strategy,
                  std::uint64_t seed) {
  return run_group(spec, num_domains, seed, std::span<const AugmentationStrategy>(&strategy, 1))
      .front();
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, Index parallelism,
                                const SweepProgress& progress) {
  spec.validate();
  if (spec.strategies.empty() || spec.domain_counts.empty()) return {};
  const std::size_t nd = spec.domain_counts.size();
  const std::size_t ns = spec.seeds.size();
  const std::size_t nst = spec.strategies.size();
  const std::size_t groups = nd * ns;
  std::vector<std::vector<SweepRow>> results(groups);

  std::atomic<std::size_t> next{0};
  std::atomic<Index> done{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (std::size_t g = next++; g < groups; g = next++) {
      const Index D = spec.domain_counts[g / ns];
      const std::uint64_t seed = spec.seeds[g % ns];
      results[g] = run_group(spec, D, seed, spec.strategies);
      const Index finished = ++done;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(finished, static_cast<Index>(groups));
      }
    }
  };
  const auto threads = static_cast<std::size_t>(
      std::clamp<Index>(parallelism, 1, static_cast<Index>(groups)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::vector<SweepRow> rows;
  rows.reserve(groups * nst);
  for (std::size_t d = 0; d < nd; ++d) {
    for (std::size_t st = 0; st < nst; ++st) {
      for (std::size_t s = 0; s < ns; ++s) rows.push_back(results[d * ns + s][st]);
    }
  }
  return rows;
}

std::vector<BoundReport> bound_curves(const SweepSpec& spec) {
  const GeneratorConfig config = spec.config_for_seed(spec.seeds.empty() ? 0 : spec.seeds.front());
  std::vector<BoundReport> out;
  for (Index D : spec.domain_counts) out.push_back(bound_report(spec.bound_query(config, D)));
  return out;
}

namespace {

constexpr const char* kResultsHeader =
    "D,N,strategy,multiplicity,seed,penalty,id_rmse,id_rmse_stderr,ood_rmse,ood_rmse_stderr,"
    "analytic_ood,analytic_id,spectral_excess,excess_ood,oracle_ood,lower_unaug,"
    "upper_tgt_general,upper_tgt_simple,invariant_exact,in_gap_window,error";

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace

void write_results_csv(std::span<const SweepRow> rows, const std::filesystem::path& path) {
  std::ofstream out = open_for_write(path);
  out << kResultsHeader << '\n';
  for (const auto& r : rows) {
    out << r.num_domains << ',' << r.total_samples << ',' << strategy_name(r.strategy.kind) << ','
        << r.strategy.multiplicity << ',' << r.seed << ',' << format_optional(r.penalty) << ','
        << format_optional(r.id_rmse) << ',' << format_optional(r.id_rmse_stderr) << ','
        << format_optional(r.ood_rmse) << ',' << format_optional(r.ood_rmse_stderr) << ','
        << format_optional(r.analytic_ood) << ',' << format_optional(r.analytic_id) << ','
        << format_optional(r.spectral_excess) << ',' << format_optional(r.excess_ood) << ','
        << format_double(r.oracle_ood) << ',' << format_optional(r.lower_unaug) << ','
        << format_optional(r.upper_tgt_general) << ',' << format_optional(r.upper_tgt_simple)
        << ',' << format_double(r.invariant_exact) << ',' << (r.in_gap_window ? 1 : 0) << ','
        << r.error << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<SweepRow> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader) {
    throw IoError(path.string() + ": unexpected results header");
  }
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 21) throw IoError(path.string() + ": expected 21 fields");
    SweepRow r;
    try {
      r.num_domains = std::stoll(f[0]);
      r.total_samples = std::stoll(f[1]);
      r.strategy.kind = parse_strategy(f[2]);
      r.strategy.multiplicity = std::stoll(f[3]);
      r.seed = std::stoull(f[4]);
    } catch (const std::logic_error& e) {
      throw IoError(path.string() + ": bad row: " + e.what());
    }
    r.penalty = parse_optional(f[5]);
    r.id_rmse = parse_optional(f[6]);
    r.id_rmse_stderr = parse_optional(f[7]);
    r.ood_rmse = parse_optional(f[8]);
    r.ood_rmse_stderr = parse_optional(f[9]);
    r.analytic_ood = parse_optional(f[10]);
    r.analytic_id = parse_optional(f[11]);
    r.spectral_excess = parse_optional(f[12]);
    r.excess_ood = parse_optional(f[13]);
    r.oracle_ood = parse_double(f[14]);
    r.lower_unaug = parse_optional(f[15]);
    r.upper_tgt_general = parse_optional(f[16]);
    r.upper_tgt_simple = parse_optional(f[17]);
    r.invariant_exact = parse_double(f[18]);
    r.in_gap_window = f[19] == "1";
    r.error = f[20];
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_bounds_csv(std::span<const BoundReport> curves, const std::filesystem::path& path) {
  std::ofstream out = open_for_write(path);
  out << "D,lower_unaug,upper_tgt_general,upper_tgt_simple,invariant_exact,in_gap_window,"
         "gap_d_min,gap_d_max";
  if (!curves.empty()) {
    for (const auto& c : curves.front().conditions_met) out << ',' << c.name;
  }
  out << '\n';
  for (const auto& b : curves) {
    out << b.num_domains << ',' << format_optional(b.lower_unaug) << ','
        << format_optional(b.upper_tgt_general) << ',' << format_optional(b.upper_tgt_simple)
        << ',' << format_double(b.invariant_exact) << ',' << (b.in_gap_window() ? 1 : 0) << ','
        << (b.gap_window ? format_double(b.gap_window->d_min) : "") << ','
        << (b.gap_window ? format_double(b.gap_window->d_max) : "");
    for (const auto& c : b.conditions_met) out << ',' << (c.met ? 1 : 0);
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

nlohmann::json sweep_metadata(const SweepSpec& spec) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["spec"] = to_json(spec);
  j["generator"] = to_json(spec.base_config);
  nlohmann::json thetas = nlohmann::json::object();
  for (std::uint64_t s : spec.seeds) {
    const GeneratorConfig c = spec.config_for_seed(s);
    const auto block = [](const auto& v) { return std::vector<double>(v.begin(), v.end()); };
    thetas[std::to_string(s)] = {{"obj", block(c.theta_star.obj())},
                                 {"core", block(c.theta_star.core())}};
  }
  j["theta_star_by_seed"] = thetas;
  j["files"] = {{"results", "results.csv"}, {"bounds", "bounds.csv"}};
  return j;
}

void emit_results(std::span<const SweepRow> rows, std::span<const BoundReport> curves,
                  const SweepSpec& spec, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  write_results_csv(rows, out_dir / "results.csv");
  write_bounds_csv(curves, out_dir / "bounds.csv");
  std::ofstream meta = open_for_write(out_dir / "metadata.json");
  meta << sweep_metadata(spec).dump(2) << '\n';
  if (!meta) throw IoError("write failed: " + (out_dir / "metadata.json").string());
}

}  // namespace dgsim
