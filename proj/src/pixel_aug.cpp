#include "dgsim/pixel_aug.hpp"

#include <algorithm>
#include <cmath>

#include <boost/random/uniform_int_distribution.hpp>
#include <Eigen/LU>

#include "dgsim/errors.hpp"
#include "dgsim/rng.hpp"

namespace dgsim::pixel {

void MaskedImage::validate() const {
  if (mask.rows() != pixels.height || mask.cols() != pixels.width) {
    throw ArgumentError("mask is " + std::to_string(mask.rows()) + "x" +
                        std::to_string(mask.cols()) + ", image is " +
                        std::to_string(pixels.height) + "x" + std::to_string(pixels.width));
  }
  if (pixels.data.rows() != pixels.num_pixels()) throw ArgumentError("image storage has wrong size");
  if (mask.size() > 0 && mask.maxCoeff() > 1) throw ArgumentError("mask must be binary");
  if (!pixels.in_range()) throw ArgumentError("pixel values must lie in [0, 255]");
}

std::string_view policy_name(CopyPastePolicy policy) {
  switch (policy) {
    case CopyPastePolicy::kAll: return "all";
    case CopyPastePolicy::kSameY: return "same-y";
    case CopyPastePolicy::kSameRegion: return "same-region";
  }
  return "all";
}

CopyPastePolicy parse_policy(std::string_view name) {
  if (name == "all") return CopyPastePolicy::kAll;
  if (name == "same-y") return CopyPastePolicy::kSameY;
  if (name == "same-region") return CopyPastePolicy::kSameRegion;
  throw ArgumentError("unknown copy-paste policy '" + std::string(name) +
                      "' (expected all, same-y or same-region)");
}

BackgroundPool::BackgroundPool(std::string empty_label) : empty_label_(std::move(empty_label)) {}

void BackgroundPool::add_background(MaskedImage background) {
  if (background.label != empty_label_) {
    throw ArgumentError("background pool entries must carry the label '" + empty_label_ + "'");
  }
  background.validate();
  const std::size_t i = backgrounds_.size();
  by_domain_[background.domain_id].push_back(i);
  if (background.region_tag) by_region_[*background.region_tag].push_back(i);
  backgrounds_.push_back(std::move(background));
}

void BackgroundPool::observe_label(int domain_id, const std::string& label) {
  observed_[domain_id].insert(label);
}

void BackgroundPool::observe(const MaskedImage& example) {
  observe_label(example.domain_id, example.label);
}

std::vector<std::size_t> BackgroundPool::candidates(const MaskedImage& example,
                                                    CopyPastePolicy policy) const {
  std::vector<std::size_t> out;
  switch (policy) {
    case CopyPastePolicy::kAll:
      out.resize(backgrounds_.size());
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
      break;
    case CopyPastePolicy::kSameY:
      if (observed_.empty()) {
        throw ArgumentError("same-y policy needs the labels observed at each domain");
      }
      for (const auto& [domain, labels] : observed_) {
        if (!labels.contains(example.label)) continue;
        const auto it = by_domain_.find(domain);
        if (it != by_domain_.end()) out.insert(out.end(), it->second.begin(), it->second.end());
      }
      std::sort(out.begin(), out.end());
      break;
    case CopyPastePolicy::kSameRegion: {
      if (!example.region_tag) throw ArgumentError("same-region policy needs a region tag");
      const auto it = by_region_.find(*example.region_tag);
      if (it != by_region_.end()) out = it->second;
      break;
    }
  }
  return out;
}

MaskedImage copy_paste(const MaskedImage& example, const BackgroundPool& pool,
                       CopyPastePolicy policy, std::uint64_t seed) {
  example.validate();
  if (example.label == pool.empty_label()) return example;
  const auto valid = pool.candidates(example, policy);
  if (valid.empty()) return example;

  Rng rng = make_rng(seed);
  boost::random::uniform_int_distribution<std::size_t> pick(0, valid.size() - 1);
  const MaskedImage& background = pool.at(valid[pick(rng)]);
  if (!background.pixels.same_shape(example.pixels)) {
    throw ArgumentError("background and example have different image shapes");
  }

  MaskedImage out = example;
  const auto fg = Eigen::Map<const Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1>>(
      example.mask.data(), example.mask.size());
  for (Index p = 0; p < out.pixels.num_pixels(); ++p) {
    if (fg(p) == 0) out.pixels.data.row(p) = background.pixels.data.row(p);
  }
  return out;
}

Eigen::Matrix3d ruifrok_hed_matrix() {
  Eigen::Matrix3d m;
  m << 0.650, 0.704, 0.286,
       0.072, 0.990, 0.105,
       0.268, 0.570, 0.776;
  return m;
}

StainBasis::StainBasis() : od_matrix(ruifrok_hed_matrix()) {}

void StainBasis::validate() const {
  if (!(epsilon > 0.0)) throw ConfigError("stain epsilon must be positive");
  if (!(strength >= 0.0) || !std::isfinite(strength)) {
    throw ConfigError("stain strength must be a finite non-negative number");
  }
  if (!od_matrix.allFinite()) throw ConfigError("OD matrix has non-finite entries");
  const Eigen::FullPivLU<Eigen::Matrix3d> lu(od_matrix);
  if (!lu.isInvertible() || od_matrix.norm() * lu.inverse().norm() > 1e12) {
    throw ConfigError("OD matrix is singular");
  }
}

StainDraw draw_stain_parameters(double strength, std::uint64_t seed) {
  if (!(strength >= 0.0)) throw ArgumentError("stain strength must be non-negative");
  Rng rng = make_rng(seed);
  StainDraw d;
  d.alpha = uniform(rng, 1.0 - strength, 1.0 + strength);
  d.beta = uniform(rng, -strength, strength);
  return d;
}

Image stain_jitter_with(const Image& image, const StainBasis& basis, double alpha, double beta) {
  basis.validate();
  if (image.channels() != 3) throw ArgumentError("stain jitter needs a 3-channel image");
  if (!image.in_range()) throw ArgumentError("pixel values must lie in [0, 255]");
  const Eigen::Matrix3d inv = basis.od_matrix.inverse();
  const Eigen::MatrixXd od = -((image.data.array() + basis.epsilon).log().matrix() * inv);
  Image out = image;
  out.data = ((-((alpha * od).array() + beta).matrix() * basis.od_matrix).array().exp() -
              basis.epsilon)
                 .cwiseMax(0.0)
                 .cwiseMin(255.0);
  return out;
}

Image stain_jitter(const Image& image, const StainBasis& basis, std::uint64_t seed) {
  basis.validate();
  const StainDraw d = draw_stain_parameters(basis.strength, seed);
  return stain_jitter_with(image, basis, d.alpha, d.beta);
}

HueDraw draw_hue_parameters(Index channels, double strength, std::uint64_t seed) {
  if (!(strength >= 0.0) || !std::isfinite(strength)) {
    throw ArgumentError("jitter strength must be a finite non-negative number");
  }
  Rng rng = make_rng(seed);
  HueDraw d{Eigen::VectorXd(channels), Eigen::VectorXd(channels)};
  for (Index c = 0; c < channels; ++c) {
    d.gain(c) = uniform(rng, std::max(0.0, 1.0 - strength), 1.0 + strength);
    d.bias(c) = 128.0 * uniform(rng, -strength, strength);
  }
  return d;
}

Image hue_jitter(const Image& image, double strength, std::uint64_t seed) {
  if (!image.in_range()) throw ArgumentError("pixel values must lie in [0, 255]");
  const HueDraw d = draw_hue_parameters(image.channels(), strength, seed);
  Image out = image;
  out.data = ((image.data * d.gain.asDiagonal()).rowwise() + d.bias.transpose())
                 .cwiseMax(0.0)
                 .cwiseMin(255.0);
  return out;
}

}  // namespace dgsim::pixel
