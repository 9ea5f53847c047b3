#ifndef DGSIM_AUGMENT_HPP
#define DGSIM_AUGMENT_HPP

#include <cstdint>
#include <string>
#include <string_view>

#include "dgsim/datagen.hpp"
#include "dgsim/rng.hpp"

namespace dgsim {

enum class AugmentationKind {
  kUnaugmented = 0,
  kOffTheShelf = 1,      // resamples x_noise
  kDomainInvariant = 2,  // resamples x_core and x_spu
  kTargeted = 3,         // resamples x_spu only
};

struct AugmentationStrategy {
  AugmentationKind kind = AugmentationKind::kUnaugmented;
  Index multiplicity = 5;

  friend bool operator==(const AugmentationStrategy&, const AugmentationStrategy&) = default;
};

/// CLI names: none, shelf, invariant, targeted.
std::string_view strategy_name(AugmentationKind kind);
AugmentationKind parse_strategy(std::string_view name);

/// Column range a strategy redraws. Always contiguous because core and spu
/// are adjacent.
struct ReplacedRange {
  Index offset = 0;
  Index size = 0;
};
ReplacedRange replaced_columns(AugmentationKind kind, const BlockLayout& layout);

/// Overwrites the replaced blocks of `x` with draws from the matched
/// augmentation distribution: N(0, I) for noise, N(0, (sigma^2 + tau^2) I) for
/// core and spu. Other entries are untouched.
void redraw_blocks(AugmentationKind kind, const GeneratorConfig& config, Rng& rng,
                   Eigen::Ref<Eigen::RowVectorXd> x);

/// One augmented copy. Label and domain are preserved.
LabeledExample augment_example(const LabeledExample& example, const AugmentationStrategy& strategy,
                               const GeneratorConfig& config, std::uint64_t seed);

/// Copy `pass` of example `index` draws from the stream derived from
/// (seed, pass, index).
std::uint64_t augmentation_stream(std::uint64_t seed, Index pass, Index index);

/// multiplicity * N rows, pass-major: rows [k N, (k+1) N) are pass k over the
/// input in order. Unaugmented returns the input unchanged.
Dataset augment_dataset(const Dataset& dataset, const AugmentationStrategy& strategy,
                        std::uint64_t seed);

}  // namespace dgsim

#endif  // DGSIM_AUGMENT_HPP
