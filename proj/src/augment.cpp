#include "dgsim/augment.hpp"

#include "dgsim/rng.hpp"

namespace dgsim {

std::string_view strategy_name(AugmentationKind kind) {
  switch (kind) {
    case AugmentationKind::kUnaugmented:
      return "none";
    case AugmentationKind::kOffTheShelf:
      return "shelf";
    case AugmentationKind::kDomainInvariant:
      return "invariant";
    case AugmentationKind::kTargeted:
      return "targeted";
  }
  return "?";
}

AugmentationKind parse_strategy(std::string_view name) {
  for (auto k : {AugmentationKind::kUnaugmented, AugmentationKind::kOffTheShelf,
                 AugmentationKind::kDomainInvariant, AugmentationKind::kTargeted}) {
    if (strategy_name(k) == name) return k;
  }
  throw ArgumentError("unknown augmentation strategy '" + std::string(name) +
                      "' (expected none, shelf, invariant or targeted)");
}

ReplacedRange replaced_columns(AugmentationKind kind, const BlockLayout& L) {
  switch (kind) {
    case AugmentationKind::kUnaugmented:
      return {0, 0};
    case AugmentationKind::kOffTheShelf:
      return {L.offset(Block::kNoise), L.noise};
    case AugmentationKind::kDomainInvariant:
      return {L.domain_offset(), L.domain_size()};
    case AugmentationKind::kTargeted:
      return {L.offset(Block::kSpu), L.spu};
  }
  return {0, 0};
}

void redraw_blocks(AugmentationKind kind, const GeneratorConfig& c, Rng& rng,
                   Eigen::Ref<Eigen::RowVectorXd> x) {
  const BlockLayout& L = c.dims;
  const double core_var = c.sigma_core_sq + c.tau_core_sq;
  const double spu_var = c.sigma_spu_sq + c.tau_spu_sq;
  switch (kind) {
    case AugmentationKind::kUnaugmented:
      break;
    case AugmentationKind::kOffTheShelf:
      fill_normal(rng, 1.0, x.segment(L.offset(Block::kNoise), L.noise));
      break;
    case AugmentationKind::kDomainInvariant:
      fill_normal(rng, core_var, x.segment(L.offset(Block::kCore), L.core));
      fill_normal(rng, spu_var, x.segment(L.offset(Block::kSpu), L.spu));
      break;
    case AugmentationKind::kTargeted:
      fill_normal(rng, spu_var, x.segment(L.offset(Block::kSpu), L.spu));
      break;
  }
}

LabeledExample augment_example(const LabeledExample& example, const AugmentationStrategy& strategy,
                               const GeneratorConfig& config, std::uint64_t seed) {
  if (!(example.x.layout() == config.dims)) {
    throw ArgumentError("augment_example: example blocks do not match config dimensions");
  }
  LabeledExample out = example;
  if (strategy.kind == AugmentationKind::kUnaugmented) return out;
  Rng rng = make_rng(seed);
  Eigen::RowVectorXd row = out.x.values().transpose();
  redraw_blocks(strategy.kind, config, rng, row);
  out.x.values() = row.transpose();
  return out;
}

std::uint64_t augmentation_stream(std::uint64_t seed, Index pass, Index index) {
  return derive_seed(seed, {static_cast<std::uint64_t>(pass), static_cast<std::uint64_t>(index)});
}

Dataset augment_dataset(const Dataset& dataset, const AugmentationStrategy& strategy,
                        std::uint64_t seed) {
  if (strategy.kind == AugmentationKind::kUnaugmented) return dataset;
  if (strategy.multiplicity < 1) throw ArgumentError("augmentation multiplicity must be >= 1");
  const Index n = dataset.size();
  const Index k_passes = strategy.multiplicity;
  Dataset out;
  out.config = dataset.config;
  out.domains = dataset.domains;
  out.features.resize(n * k_passes, dataset.features.cols());
  out.labels.resize(n * k_passes);
  out.domain_ids.resize(static_cast<std::size_t>(n * k_passes));
  for (Index k = 0; k < k_passes; ++k) {
    for (Index i = 0; i < n; ++i) {
      const Index r = k * n + i;
      out.features.row(r) = dataset.features.row(i);
      Rng rng = make_rng(augmentation_stream(seed, k, i));
      redraw_blocks(strategy.kind, dataset.config, rng, out.features.row(r));
      out.labels(r) = dataset.labels(i);
      out.domain_ids[static_cast<std::size_t>(r)] = dataset.domain_ids[static_cast<std::size_t>(i)];
    }
  }
  return out;
}

}  // namespace dgsim
