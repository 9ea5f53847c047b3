#ifndef DGSIM_DATAGEN_HPP
#define DGSIM_DATAGEN_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "dgsim/config.hpp"

namespace dgsim {

struct DomainAttributes {
  int id = 0;
  Eigen::VectorXd mu_core;
  Eigen::VectorXd mu_spu;

  friend bool operator==(const DomainAttributes&, const DomainAttributes&) = default;
};

struct LabeledExample {
  PartitionedVector x;
  double y = 0.0;
  int domain_id = 0;
};

/// A finite sample. Row i of `features` is example i in [obj, noise, core, spu]
/// order; `domain_ids[i]` indexes into `domains` by DomainAttributes::id.
struct Dataset {
  GeneratorConfig config;
  std::vector<DomainAttributes> domains;
  RowMatrixX<double> features;
  Eigen::VectorXd labels;
  std::vector<int> domain_ids;

  Index size() const { return labels.size(); }
  bool empty() const { return size() == 0; }
  LabeledExample example(Index i) const;
  /// Rows `indices` in the given order; domains and config are shared.
  Dataset select(std::span<const Index> indices) const;
};

/// D domains. Domain d is drawn from its own stream derived from (seed, d), so
/// the first k domains are the same for any num_domains >= k.
std::vector<DomainAttributes> sample_domains(const GeneratorConfig& config, Index num_domains,
                                             std::uint64_t seed);

/// Writes example `index` of the stream `seed` into `x` and `y`. Examples are
/// assigned to domains round-robin (index mod D), so per-domain counts differ by
/// at most one. Every example has an independent stream derived from (seed, index).
void generate_example(const GeneratorConfig& config, const DomainAttributes& domain,
                      std::uint64_t seed, Index index, Eigen::Ref<Eigen::RowVectorXd> x,
                      double& y);

/// Rows first..first+x.rows()-1 of the stream; `domain_ids` receives the ids.
void generate_rows(const GeneratorConfig& config, std::span<const DomainAttributes> domains,
                   std::uint64_t seed, Index first, Eigen::Ref<RowMatrixX<double>> x,
                   Eigen::Ref<Eigen::VectorXd> y, std::span<int> domain_ids);

/// Same as generate_rows but for an arbitrary list of global example indices.
void generate_rows_at(const GeneratorConfig& config, std::span<const DomainAttributes> domains,
                      std::uint64_t seed, std::span<const Index> indices,
                      Eigen::Ref<RowMatrixX<double>> x, Eigen::Ref<Eigen::VectorXd> y,
                      std::span<int> domain_ids);

Dataset sample_dataset(const GeneratorConfig& config, std::vector<DomainAttributes> domains,
                       Index num_examples, std::uint64_t seed);

/// Positions (into `domain_ids`) of the train and validation parts. The
/// validation size is round(fraction * N) clamped to [1, N-1] and is apportioned
/// across domains by largest remainder; members are chosen uniformly within each
/// domain. Both lists are ascending.
std::pair<std::vector<Index>, std::vector<Index>> split_indices(std::span<const int> domain_ids,
                                                                double fraction,
                                                                std::uint64_t seed);

std::pair<Dataset, Dataset> split_id_validation(const Dataset& dataset, double fraction,
                                                std::uint64_t seed);

/// CSV with header domain_id,y,obj_0..,noise_0..,core_0..,spu_0..
void write_dataset_csv(const Dataset& dataset, const std::filesystem::path& path);

/// Inverse of write_dataset_csv. Block sizes come from the header; `domains` is
/// left empty and `config` is the default one with those block sizes.
Dataset read_dataset_csv(const std::filesystem::path& path);

}  // namespace dgsim

#endif  // DGSIM_DATAGEN_HPP
