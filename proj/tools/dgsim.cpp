// Command-line front end: sweeps, bound curves, the verification suite, data
// generation, ridge fits and image augmentation.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dgsim/augment.hpp"
#include "dgsim/config.hpp"
#include "dgsim/datagen.hpp"
#include "dgsim/errors.hpp"
#include "dgsim/estimators.hpp"
#include "dgsim/image_io.hpp"
#include "dgsim/pixel_aug.hpp"
#include "dgsim/sweep.hpp"
#include "dgsim/verify.hpp"

namespace {

using namespace dgsim;

struct SweepArgs {
  std::string spec;
  std::string out;
  Index parallel = 1;
  bool quiet = false;
};

int run_sweep_cmd(const SweepArgs& a) {
  const SweepSpec spec = load_sweep_spec(a.spec);
  SweepProgress progress;
  if (!a.quiet) {
    progress = [](Index done, Index total) {
      std::cerr << "\r" << done << "/" << total << " groups" << (done == total ? "\n" : "")
                << std::flush;
    };
  }
  const auto rows = run_sweep(spec, a.parallel, progress);
  emit_results(rows, bound_curves(spec), spec, a.out);
  Index failed = 0;
  for (const auto& r : rows) failed += r.ok() ? 0 : 1;
  std::cout << rows.size() << " rows written to " << a.out;
  if (failed > 0) std::cout << " (" << failed << " failed cells)";
  std::cout << '\n';
  return 0;
}

int run_verify_cmd(std::uint64_t seed) {
  const VerifyReport rep = run_verification(seed);
  for (const auto& c : rep.checks) {
    const char* status = c.passed ? "PASS" : (c.informational ? "INFO" : "FAIL");
    std::cout << status << "  " << c.name;
    if (!c.detail.empty()) std::cout << "  [" << c.detail << "]";
    std::cout << '\n';
  }
  std::cout << (rep.ok() ? "all checks passed" : "verification failed") << '\n';
  return rep.ok() ? 0 : 1;
}

struct GenerateArgs {
  std::string config;
  Index domains = 10;
  Index samples = 1000;
  std::uint64_t seed = 0;
  std::string aug = "none";
  Index multiplicity = 5;
  std::string out;
  std::string config_out;
};

int run_generate_cmd(const GenerateArgs& a) {
  GeneratorConfig cfg = a.config.empty() ? default_config(a.seed) : load_config(a.config);
  const auto domains = sample_domains(cfg, a.domains, derive_seed(cfg.seed, {tag(Stream::kDomains)}));
  Dataset data = sample_dataset(cfg, domains, a.samples,
                                derive_seed(cfg.seed, {tag(Stream::kExamples),
                                                       static_cast<std::uint64_t>(a.domains)}));
  const AugmentationStrategy strategy{parse_strategy(a.aug), a.multiplicity};
  data = augment_dataset(data, strategy,
                         derive_seed(cfg.seed, {tag(Stream::kAugment),
                                                static_cast<std::uint64_t>(a.domains),
                                                static_cast<std::uint64_t>(strategy.kind)}));
  write_dataset_csv(data, a.out);
  if (!a.config_out.empty()) save_config(cfg, a.config_out);
  std::cout << data.size() << " examples written to " << a.out << '\n';
  return 0;
}

struct FitArgs {
  std::string data;
  std::string validation;
  double penalty = 0.0;
  bool pseudo_inverse = false;
  std::string out;
};

int run_fit_cmd(const FitArgs& a) {
  const Dataset train = read_dataset_csv(a.data);
  LinearModel model;
  if (!a.validation.empty()) {
    const Dataset val = read_dataset_csv(a.validation);
    const auto grid = default_penalty_grid();
    const PenaltyChoice choice = tune_penalty(train, val, grid);
    std::cout << "selected penalty " << choice.penalty << '\n';
    model = choice.model;
  } else {
    model = ridge_fit(train, a.penalty,
                      a.pseudo_inverse ? SingularPolicy::kPseudoInverse : SingularPolicy::kThrow);
  }
  write_model_csv(model, a.out);
  return 0;
}

struct ImageArgs {
  std::string op;
  std::string in;
  std::string out;
  std::uint64_t seed = 0;
  double strength = 0.05;
  std::string mask;
  std::string label;
  int domain = 0;
  std::string region;
  std::string policy = "all";
  std::vector<std::string> backgrounds;  // path[:domain[:region]]
  std::vector<std::string> observed;     // domain:label
};

std::vector<std::string> split_colon(const std::string& s) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == ':') {
      parts.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return parts;
}

int run_image_cmd(const ImageArgs& a) {
  using namespace dgsim::pixel;
  const Image image = read_image(a.in);
  Image result;
  if (a.op == "stain-jitter") {
    StainBasis basis;
    basis.strength = a.strength;
    result = stain_jitter(image, basis, a.seed);
  } else if (a.op == "hue-jitter") {
    result = hue_jitter(image, a.strength, a.seed);
  } else {
    if (a.mask.empty()) throw ArgumentError("copy-paste needs --mask");
    MaskedImage ex{image, read_mask(a.mask), a.label, a.domain, std::nullopt};
    if (!a.region.empty()) ex.region_tag = a.region;
    BackgroundPool pool;
    for (const auto& spec : a.backgrounds) {
      const auto parts = split_colon(spec);
      MaskedImage bg;
      bg.pixels = read_image(parts[0]);
      bg.mask = Mask::Zero(bg.pixels.height, bg.pixels.width);
      bg.label = kEmptyLabel;
      bg.domain_id = parts.size() > 1 && !parts[1].empty() ? std::stoi(parts[1]) : 0;
      if (parts.size() > 2 && !parts[2].empty()) bg.region_tag = parts[2];
      pool.add_background(std::move(bg));
    }
    for (const auto& obs : a.observed) {
      const auto parts = split_colon(obs);
      if (parts.size() != 2) throw ArgumentError("--observed expects domain:label");
      pool.observe_label(std::stoi(parts[0]), parts[1]);
    }
    result = copy_paste(ex, pool, parse_policy(a.policy), a.seed).pixels;
  }
  write_image(result, a.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear-Gaussian domain generalization simulator"};
  app.set_version_flag("--version", std::string(dgsim::kVersion));
  app.require_subcommand(1);

  SweepArgs sweep;
  auto* sw = app.add_subcommand("sweep", "Run a sweep spec and write results.csv, bounds.csv, metadata.json");
  sw->add_option("--spec", sweep.spec, "Sweep spec (JSON)")->required()->check(CLI::ExistingFile);
  sw->add_option("--out", sweep.out, "Output directory")->required();
  sw->add_option("--parallel", sweep.parallel, "Worker threads")->check(CLI::PositiveNumber);
  sw->add_flag("--quiet", sweep.quiet, "No progress output");

  std::string bounds_spec, bounds_out;
  auto* bd = app.add_subcommand("bounds", "Evaluate the excess-risk bounds over the spec's D grid");
  bd->add_option("--spec", bounds_spec, "Sweep spec (JSON)")->required()->check(CLI::ExistingFile);
  bd->add_option("--out", bounds_out, "Output CSV")->required();

  std::uint64_t verify_seed = 0;
  auto* vf = app.add_subcommand("verify", "Run the cross-formula property suite");
  vf->add_option("--seed", verify_seed, "Seed for random configurations");

  GenerateArgs gen;
  auto* gn = app.add_subcommand("generate", "Sample a dataset and write it as CSV");
  gn->add_option("--config", gen.config, "Generator config (JSON); default config if omitted")
      ->check(CLI::ExistingFile);
  gn->add_option("--domains", gen.domains, "Number of training domains")->check(CLI::PositiveNumber);
  gn->add_option("--samples", gen.samples, "Number of examples")->check(CLI::PositiveNumber);
  gn->add_option("--seed", gen.seed, "Seed when no config is given");
  gn->add_option("--aug", gen.aug, "Augmentation")
      ->check(CLI::IsMember({"none", "shelf", "invariant", "targeted"}));
  gn->add_option("--multiplicity", gen.multiplicity, "Augmented copies per example")
      ->check(CLI::PositiveNumber);
  gn->add_option("--out", gen.out, "Dataset CSV")->required();
  gn->add_option("--config-out", gen.config_out, "Also write the generator config here");

  FitArgs fit;
  auto* ft = app.add_subcommand("fit", "Ridge fit on a dataset CSV; writes block,index,weight");
  ft->add_option("--data", fit.data, "Training dataset CSV")->required()->check(CLI::ExistingFile);
  ft->add_option("--validation", fit.validation, "Validation CSV; tunes the penalty on the default grid")
      ->check(CLI::ExistingFile);
  ft->add_option("--penalty", fit.penalty, "Ridge penalty")->check(CLI::NonNegativeNumber);
  ft->add_flag("--pseudo-inverse", fit.pseudo_inverse, "Pseudo-solve singular systems instead of failing");
  ft->add_option("--out", fit.out, "Model CSV")->required();

  ImageArgs img;
  auto* im = app.add_subcommand("augment-image", "Apply one image augmentation (PNG or CSV grid)");
  im->add_option("--op", img.op, "Operation")
      ->required()
      ->check(CLI::IsMember({"copy-paste", "stain-jitter", "hue-jitter"}));
  im->add_option("--in", img.in, "Input image")->required()->check(CLI::ExistingFile);
  im->add_option("--out", img.out, "Output image")->required();
  im->add_option("--seed", img.seed, "Random seed");
  im->add_option("--strength", img.strength, "Jitter strength (sigma for stain jitter)");
  im->add_option("--mask", img.mask, "Foreground mask (copy-paste)")->check(CLI::ExistingFile);
  im->add_option("--label", img.label, "Example label (copy-paste)");
  im->add_option("--domain", img.domain, "Example domain id (copy-paste)");
  im->add_option("--region", img.region, "Example region tag (copy-paste)");
  im->add_option("--policy", img.policy, "Background policy")
      ->check(CLI::IsMember({"all", "same-y", "same-region"}));
  im->add_option("--background", img.backgrounds, "Empty background as path[:domain[:region]]");
  im->add_option("--observed", img.observed, "Label observed at a domain, as domain:label");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sw->parsed()) return run_sweep_cmd(sweep);
    if (bd->parsed()) {
      const SweepSpec spec = load_sweep_spec(bounds_spec);
      const auto curves = bound_curves(spec);
      write_bounds_csv(curves, bounds_out);
      std::cout << curves.size() << " rows written to " << bounds_out << '\n';
      return 0;
    }
    if (vf->parsed()) return run_verify_cmd(verify_seed);
    if (gn->parsed()) return run_generate_cmd(gen);
    if (ft->parsed()) return run_fit_cmd(fit);
    if (im->parsed()) return run_image_cmd(img);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
