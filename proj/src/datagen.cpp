#include "dgsim/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include "dgsim/io.hpp"
#include "dgsim/rng.hpp"

namespace dgsim {

LabeledExample Dataset::example(Index i) const {
  if (i < 0 || i >= size()) throw ArgumentError("example index out of range");
  return {PartitionedVector(config.dims, features.row(i).transpose()), labels(i),
          domain_ids[static_cast<std::size_t>(i)]};
}

Dataset Dataset::select(std::span<const Index> indices) const {
  Dataset out;
  out.config = config;
  out.domains = domains;
  out.features.resize(static_cast<Index>(indices.size()), features.cols());
  out.labels.resize(static_cast<Index>(indices.size()));
  out.domain_ids.resize(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const Index i = indices[k];
    if (i < 0 || i >= size()) throw ArgumentError("select: index out of range");
    out.features.row(static_cast<Index>(k)) = features.row(i);
    out.labels(static_cast<Index>(k)) = labels(i);
    out.domain_ids[k] = domain_ids[static_cast<std::size_t>(i)];
  }
  return out;
}

std::vector<DomainAttributes> sample_domains(const GeneratorConfig& config, Index num_domains,
                                             std::uint64_t seed) {
  config.validate();
  if (num_domains < 1) throw ArgumentError("sample_domains: need at least one domain");
  std::vector<DomainAttributes> domains(static_cast<std::size_t>(num_domains));
  for (Index d = 0; d < num_domains; ++d) {
    Rng rng = make_rng(derive_seed(seed, {static_cast<std::uint64_t>(d)}));
    auto& dom = domains[static_cast<std::size_t>(d)];
    dom.id = static_cast<int>(d);
    dom.mu_core.resize(config.dims.core);
    dom.mu_spu.resize(config.dims.spu);
    fill_normal(rng, config.tau_core_sq, dom.mu_core);
    fill_normal(rng, config.tau_spu_sq, dom.mu_spu);
  }
  return domains;
}

void generate_example(const GeneratorConfig& c, const DomainAttributes& domain,
                      std::uint64_t seed, Index index, Eigen::Ref<Eigen::RowVectorXd> x,
                      double& y) {
  const BlockLayout& L = c.dims;
  Rng rng = make_rng(derive_seed(seed, {static_cast<std::uint64_t>(index)}));
  fill_normal(rng, 1.0, x.segment(L.offset(Block::kObj), L.obj));
  fill_normal(rng, 1.0, x.segment(L.offset(Block::kNoise), L.noise));
  auto core = x.segment(L.offset(Block::kCore), L.core);
  fill_normal(rng, c.sigma_core_sq, core);
  core += domain.mu_core.transpose();
  auto spu = x.segment(L.offset(Block::kSpu), L.spu);
  fill_normal(rng, c.sigma_spu_sq, spu);
  spu += domain.mu_spu.transpose();
  boost::random::normal_distribution<double> eps(0.0, std::sqrt(c.sigma_y_sq));
  // y depends on the attribute mu_core, not on the noised x_core.
  y = c.theta_star.obj().dot(x.segment(L.offset(Block::kObj), L.obj).transpose()) +
      c.theta_star.core().dot(domain.mu_core) + eps(rng);
}

namespace {

void check_rows(const GeneratorConfig& config, std::span<const DomainAttributes> domains,
                Index rows, const Eigen::Ref<RowMatrixX<double>>& x,
                const Eigen::Ref<Eigen::VectorXd>& y, std::span<int> ids) {
  if (domains.empty()) throw ArgumentError("generate_rows: empty domain list");
  if (x.cols() != config.dims.total() || x.rows() != rows || y.size() != rows ||
      static_cast<Index>(ids.size()) != rows) {
    throw ArgumentError("generate_rows: output shape mismatch");
  }
  for (const auto& d : domains) {
    if (d.mu_core.size() != config.dims.core || d.mu_spu.size() != config.dims.spu) {
      throw ArgumentError("domain attributes do not match config dimensions");
    }
  }
}

}  // namespace

void generate_rows(const GeneratorConfig& config, std::span<const DomainAttributes> domains,
                   std::uint64_t seed, Index first, Eigen::Ref<RowMatrixX<double>> x,
                   Eigen::Ref<Eigen::VectorXd> y, std::span<int> domain_ids) {
  check_rows(config, domains, x.rows(), x, y, domain_ids);
  const auto D = static_cast<Index>(domains.size());
  for (Index r = 0; r < x.rows(); ++r) {
    const Index i = first + r;
    const auto& dom = domains[static_cast<std::size_t>(i % D)];
    generate_example(config, dom, seed, i, x.row(r), y(r));
    domain_ids[static_cast<std::size_t>(r)] = dom.id;
  }
}

void generate_rows_at(const GeneratorConfig& config, std::span<const DomainAttributes> domains,
                      std::uint64_t seed, std::span<const Index> indices,
                      Eigen::Ref<RowMatrixX<double>> x, Eigen::Ref<Eigen::VectorXd> y,
                      std::span<int> domain_ids) {
  check_rows(config, domains, static_cast<Index>(indices.size()), x, y, domain_ids);
  const auto D = static_cast<Index>(domains.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const Index i = indices[r];
    const auto& dom = domains[static_cast<std::size_t>(i % D)];
    generate_example(config, dom, seed, i, x.row(static_cast<Index>(r)),
                     y(static_cast<Index>(r)));
    domain_ids[r] = dom.id;
  }
}

Dataset sample_dataset(const GeneratorConfig& config, std::vector<DomainAttributes> domains,
                       Index num_examples, std::uint64_t seed) {
  config.validate();
  if (domains.empty()) throw ArgumentError("sample_dataset: empty domain list");
  if (num_examples < 1) throw ArgumentError("sample_dataset: need at least one example");
  Dataset ds;
  ds.config = config;
  ds.domains = std::move(domains);
  ds.features.resize(num_examples, config.dims.total());
  ds.labels.resize(num_examples);
  ds.domain_ids.resize(static_cast<std::size_t>(num_examples));
  generate_rows(config, ds.domains, seed, 0, ds.features, ds.labels, ds.domain_ids);
  return ds;
}

std::pair<std::vector<Index>, std::vector<Index>> split_indices(std::span<const int> domain_ids,
                                                                double fraction,
                                                                std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ArgumentError("validation fraction must lie in (0, 1)");
  }
  const auto n = static_cast<Index>(domain_ids.size());
  if (n < 2) throw ArgumentError("split needs at least two examples");

  // Group positions by domain, in order of first appearance.
  std::vector<int> order;
  std::unordered_map<int, std::vector<Index>> members;
  for (Index i = 0; i < n; ++i) {
    auto [it, inserted] = members.try_emplace(domain_ids[static_cast<std::size_t>(i)]);
    if (inserted) order.push_back(it->first);
    it->second.push_back(i);
  }

  const Index total_val =
      std::clamp<Index>(static_cast<Index>(std::llround(fraction * static_cast<double>(n))), 1,
                        n - 1);
  // Largest-remainder apportionment of total_val over domains.
  std::vector<Index> quota(order.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  Index assigned = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double exact =
        static_cast<double>(total_val) * static_cast<double>(members[order[k]].size()) /
        static_cast<double>(n);
    quota[k] = static_cast<Index>(std::floor(exact));
    assigned += quota[k];
    remainders.emplace_back(exact - std::floor(exact), k);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < total_val; ++k) {
    ++quota[remainders[k % remainders.size()].second];
    ++assigned;
  }

  std::vector<char> is_val(static_cast<std::size_t>(n), 0);
  for (std::size_t k = 0; k < order.size(); ++k) {
    auto pool = members[order[k]];
    Rng rng = make_rng(derive_seed(seed, {static_cast<std::uint64_t>(k)}));
    std::shuffle(pool.begin(), pool.end(), rng);
    for (Index j = 0; j < quota[k]; ++j) is_val[static_cast<std::size_t>(pool[j])] = 1;
  }
  std::pair<std::vector<Index>, std::vector<Index>> out;
  for (Index i = 0; i < n; ++i) (is_val[static_cast<std::size_t>(i)] ? out.second : out.first).push_back(i);
  return out;
}

std::pair<Dataset, Dataset> split_id_validation(const Dataset& dataset, double fraction,
                                                std::uint64_t seed) {
  auto [train, val] = split_indices(dataset.domain_ids, fraction, seed);
  return {dataset.select(train), dataset.select(val)};
}

void write_dataset_csv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "domain_id,y";
  for (Block b : kAllBlocks) {
    for (Index j = 0; j < dataset.config.dims.size(b); ++j) out << ',' << block_name(b) << '_' << j;
  }
  out << '\n';
  for (Index i = 0; i < dataset.size(); ++i) {
    out << dataset.domain_ids[static_cast<std::size_t>(i)] << ',' << format_double(dataset.labels(i));
    for (Index j = 0; j < dataset.features.cols(); ++j) out << ',' << format_double(dataset.features(i, j));
    out << '\n';
  }
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": empty file");
  const auto head = split_csv_line(line);
  if (head.size() < 2 || head[0] != "domain_id" || head[1] != "y") {
    throw IoError(path.string() + ": header must start with domain_id,y");
  }
  BlockLayout layout{0, 0, 0, 0};
  std::size_t col = 2;
  for (Block b : kAllBlocks) {
    const std::string prefix = std::string(block_name(b)) + "_";
    Index n = 0;
    while (col < head.size() && head[col] == prefix + std::to_string(n)) {
      ++n;
      ++col;
    }
    switch (b) {
      case Block::kObj: layout.obj = n; break;
      case Block::kNoise: layout.noise = n; break;
      case Block::kCore: layout.core = n; break;
      case Block::kSpu: layout.spu = n; break;
    }
  }
  if (col != head.size()) throw IoError(path.string() + ": unexpected column '" + head[col] + "'");

  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rows.push_back(split_csv_line(line));
    if (rows.back().size() != head.size()) {
      throw IoError(path.string() + ": row " + std::to_string(rows.size()) + " has wrong width");
    }
  }
  Dataset ds;
  ds.config = with_dims(default_config(), layout);
  const auto n = static_cast<Index>(rows.size());
  ds.features.resize(n, layout.total());
  ds.labels.resize(n);
  ds.domain_ids.resize(rows.size());
  try {
    for (Index i = 0; i < n; ++i) {
      const auto& f = rows[static_cast<std::size_t>(i)];
      ds.domain_ids[static_cast<std::size_t>(i)] = std::stoi(f[0]);
      ds.labels(i) = parse_double(f[1]);
      for (Index j = 0; j < layout.total(); ++j) {
        ds.features(i, j) = parse_double(f[static_cast<std::size_t>(j) + 2]);
      }
    }
  } catch (const std::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  return ds;
}

}  // namespace dgsim
