#include "dgsim/estimators.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "dgsim/io.hpp"
#include "dgsim/rng.hpp"

namespace dgsim {

NormalEquations NormalEquations::zeros(const BlockLayout& layout) {
  NormalEquations ne;
  ne.layout = layout;
  ne.gram = Eigen::MatrixXd::Zero(layout.total(), layout.total());
  ne.moment = Eigen::VectorXd::Zero(layout.total());
  return ne;
}

NormalEquations NormalEquations::from(const Dataset& dataset) {
  NormalEquations ne = zeros(dataset.config.dims);
  ne.add_rows(dataset.features, dataset.labels);
  return ne;
}

void NormalEquations::add_rows(const Eigen::Ref<const RowMatrixX<double>>& x,
                               const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (x.cols() != gram.cols() || x.rows() != y.size()) {
    throw ArgumentError("normal equations: row shape mismatch");
  }
  gram.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
  moment.noalias() += x.transpose() * y;
  label_energy += y.squaredNorm();
  count += x.rows();
}

Eigen::MatrixXd NormalEquations::normalized_gram() const {
  Eigen::MatrixXd g = gram.selfadjointView<Eigen::Lower>();
  return g / static_cast<double>(count);
}

double NormalEquations::mse(const LinearModel& model) const {
  if (count == 0) throw ArgumentError("mse of an empty sample");
  const Eigen::VectorXd& w = model.values();
  const double quad = w.dot(gram.selfadjointView<Eigen::Lower>() * w);
  return (label_energy - 2.0 * w.dot(moment) + quad) / static_cast<double>(count);
}

AugmentedAccumulator::AugmentedAccumulator(const GeneratorConfig& config,
                                           const AugmentationStrategy& strategy,
                                           std::uint64_t seed)
    : config_(config),
      kind_(strategy.kind),
      passes_(strategy.kind == AugmentationKind::kUnaugmented ? 1 : strategy.multiplicity),
      seed_(seed),
      replaced_(replaced_columns(strategy.kind, config.dims)) {
  if (passes_ < 1) throw ArgumentError("augmentation multiplicity must be >= 1");
  const Index p = config.dims.total();
  for (Index j = 0; j < p; ++j) {
    if (j < replaced_.offset || j >= replaced_.offset + replaced_.size) kept_.push_back(j);
  }
  const auto a = static_cast<Index>(kept_.size());
  const Index r = replaced_.size;
  kk_ = Eigen::MatrixXd::Zero(a, a);
  rk_ = Eigen::MatrixXd::Zero(r, a);
  rr_ = Eigen::MatrixXd::Zero(r, r);
  bk_ = Eigen::VectorXd::Zero(a);
  br_ = Eigen::VectorXd::Zero(r);
}

void AugmentedAccumulator::add(const Eigen::Ref<const RowMatrixX<double>>& x,
                               const Eigen::Ref<const Eigen::VectorXd>& y, Index first_position) {
  accumulate(x, y, first_position, true);
}

void AugmentedAccumulator::add_redrawn(const Eigen::Ref<const RowMatrixX<double>>& x,
                                       const Eigen::Ref<const Eigen::VectorXd>& y,
                                       Index first_position) {
  accumulate(x, y, first_position, false);
}

void AugmentedAccumulator::accumulate(const Eigen::Ref<const RowMatrixX<double>>& x,
                                      const Eigen::Ref<const Eigen::VectorXd>& y,
                                      Index first_position, bool with_kept) {
  if (x.cols() != config_.dims.total() || x.rows() != y.size()) {
    throw ArgumentError("augmented accumulator: row shape mismatch");
  }
  const Index n = x.rows();
  const Index r = replaced_.size;
  const auto passes = static_cast<double>(passes_);
  count_ += passes_ * n;
  if (!with_kept && r == 0) return;

  const RowMatrixX<double> kept = x(Eigen::all, kept_);
  if (with_kept) {
    kk_.selfadjointView<Eigen::Lower>().rankUpdate(kept.transpose(), passes);
    bk_.noalias() += passes * (kept.transpose() * y);
    yy_ += passes * y.squaredNorm();
  }
  if (r == 0) return;

  // Kept columns are identical across passes, so their cross term only needs
  // the sum of the redrawn blocks.
  RowMatrixX<double> pass(n, r);
  RowMatrixX<double> pass_sum = RowMatrixX<double>::Zero(n, r);
  Eigen::RowVectorXd scratch = Eigen::RowVectorXd::Zero(config_.dims.total());
  for (Index k = 0; k < passes_; ++k) {
    for (Index i = 0; i < n; ++i) {
      Rng rng = make_rng(augmentation_stream(seed_, k, first_position + i));
      redraw_blocks(kind_, config_, rng, scratch);
      pass.row(i) = scratch.segment(replaced_.offset, r);
    }
    rr_.selfadjointView<Eigen::Lower>().rankUpdate(pass.transpose());
    pass_sum += pass;
  }
  rk_.noalias() += pass_sum.transpose() * kept;
  br_.noalias() += pass_sum.transpose() * y;
}

NormalEquations AugmentedAccumulator::result() const { return assemble(kk_, bk_, yy_); }

NormalEquations AugmentedAccumulator::result(const NormalEquations& base) const {
  if (!(base.layout == config_.dims) || base.count * passes_ != count_) {
    throw ArgumentError("augmented accumulator: base statistics cover different rows");
  }
  const auto passes = static_cast<double>(passes_);
  const Eigen::MatrixXd full = base.gram.selfadjointView<Eigen::Lower>();
  const Eigen::MatrixXd kk = passes * full(kept_, kept_);
  const Eigen::VectorXd bk = passes * base.moment(kept_);
  return assemble(kk, bk, passes * base.label_energy);
}

NormalEquations AugmentedAccumulator::assemble(const Eigen::MatrixXd& kk, const Eigen::VectorXd& bk,
                                               double yy) const {
  NormalEquations ne = NormalEquations::zeros(config_.dims);
  const auto a = static_cast<Index>(kept_.size());
  const Index r = replaced_.size;
  std::vector<Index> order = kept_;
  for (Index j = 0; j < r; ++j) order.push_back(replaced_.offset + j);

  Eigen::MatrixXd permuted(a + r, a + r);
  permuted.topLeftCorner(a, a) = kk.selfadjointView<Eigen::Lower>();
  permuted.bottomLeftCorner(r, a) = rk_;
  permuted.topRightCorner(a, r) = rk_.transpose();
  permuted.bottomRightCorner(r, r) = rr_.selfadjointView<Eigen::Lower>();
  for (Index i = 0; i < a + r; ++i) {
    for (Index j = 0; j < a + r; ++j) {
      ne.gram(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]) = permuted(i, j);
    }
    ne.moment(order[static_cast<std::size_t>(i)]) = i < a ? bk(i) : br_(i - a);
  }
  ne.label_energy = yy;
  ne.count = count_;
  return ne;
}

LinearModel solve_ridge(const NormalEquations& ne, double penalty, SingularPolicy policy) {
  if (!(penalty >= 0.0) || !std::isfinite(penalty)) {
    throw ArgumentError("ridge penalty must be a finite non-negative number");
  }
  if (ne.count == 0) throw ArgumentError("ridge_fit: empty training set");
  const double n = static_cast<double>(ne.count);
  Eigen::MatrixXd a = ne.normalized_gram();
  a.diagonal().array() += penalty;
  const Eigen::VectorXd rhs = ne.moment / n;

  Eigen::LLT<Eigen::MatrixXd> llt(a);
  const bool ok = llt.info() == Eigen::Success && llt.rcond() > 1e-13;
  if (ok) return LinearModel(ne.layout, llt.solve(rhs));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  if (eig.info() != Eigen::Success) throw NumericalError("ridge: eigendecomposition failed");
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double top = lambda.cwiseAbs().maxCoeff();
  if (policy == SingularPolicy::kThrow) {
    std::ostringstream msg;
    msg << "ridge: singular normal equations at penalty " << penalty
        << " (N = " << ne.count << ", dimension = " << a.rows()
        << ", condition estimate = " << (lambda.minCoeff() > 0 ? top / lambda.minCoeff() : INFINITY)
        << ")";
    throw NumericalError(msg.str());
  }
  const double cutoff = 1e-10 * top;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(lambda.size());
  for (Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) > cutoff) inv(i) = 1.0 / lambda(i);
  }
  const Eigen::MatrixXd& u = eig.eigenvectors();
  return LinearModel(ne.layout, u * inv.asDiagonal() * (u.transpose() * rhs));
}

LinearModel ridge_fit(const Dataset& train, double penalty, SingularPolicy policy) {
  if (train.empty()) throw ArgumentError("ridge_fit: empty training set");
  return solve_ridge(NormalEquations::from(train), penalty, policy);
}

PenaltyChoice tune_penalty(const NormalEquations& train, const NormalEquations& id_val,
                           std::span<const double> grid) {
  if (grid.empty()) throw ArgumentError("tune_penalty: empty penalty grid");
  PenaltyChoice best;
  double best_mse = INFINITY;
  bool have = false;
  for (double penalty : grid) {
    LinearModel model = solve_ridge(train, penalty);
    const double mse = id_val.mse(model);
    best.validation_mse.push_back(mse);
    if (!have || mse < best_mse || (mse == best_mse && penalty > best.penalty)) {
      best.penalty = penalty;
      best.model = std::move(model);
      best_mse = mse;
      have = true;
    }
  }
  return best;
}

PenaltyChoice tune_penalty(const Dataset& train, const Dataset& id_val,
                           std::span<const double> grid) {
  if (id_val.empty()) throw ArgumentError("tune_penalty: empty validation set");
  return tune_penalty(NormalEquations::from(train), NormalEquations::from(id_val), grid);
}

std::vector<double> default_penalty_grid() {
  std::vector<double> grid;
  for (int k = 0; k < 13; ++k) grid.push_back(std::pow(10.0, -6.0 + 8.0 * k / 12.0));
  return grid;
}

void write_model_csv(const LinearModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "block,index,weight\n";
  for (Block b : kAllBlocks) {
    const auto w = model.block(b);
    for (Index j = 0; j < w.size(); ++j) {
      out << block_name(b) << ',' << j << ',' << format_double(w(j)) << '\n';
    }
  }
}

LinearModel read_model_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  std::map<std::string, std::vector<double>> blocks;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 3) throw IoError("model csv: expected 3 fields in '" + line + "'");
    auto& v = blocks[f[0]];
    if (static_cast<double>(v.size()) != parse_double(f[1])) {
      throw IoError("model csv: indices of block " + f[0] + " are not consecutive");
    }
    v.push_back(parse_double(f[2]));
  }
  BlockLayout layout;
  layout.obj = static_cast<Index>(blocks["obj"].size());
  layout.noise = static_cast<Index>(blocks["noise"].size());
  layout.core = static_cast<Index>(blocks["core"].size());
  layout.spu = static_cast<Index>(blocks["spu"].size());
  LinearModel model(layout);
  for (Block b : kAllBlocks) {
    const auto& v = blocks[std::string(block_name(b))];
    model.block(b) = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
  }
  return model;
}

}  // namespace dgsim
