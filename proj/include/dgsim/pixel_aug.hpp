#ifndef DGSIM_PIXEL_AUG_HPP
#define DGSIM_PIXEL_AUG_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dgsim/types.hpp"

namespace dgsim::pixel {

/// H x W x C image. Pixel (r, c) is row r * width + c of `data`, channels
/// along the columns.
template <typename Scalar>
struct BasicImage {
  Index height = 0;
  Index width = 0;
  RowMatrixX<Scalar> data;

  BasicImage() = default;
  BasicImage(Index h, Index w, Index channels, Scalar fill = Scalar(0))
      : height(h), width(w), data(RowMatrixX<Scalar>::Constant(h * w, channels, fill)) {}

  Index channels() const { return data.cols(); }
  Index num_pixels() const { return height * width; }
  Scalar& at(Index r, Index c, Index ch) { return data(r * width + c, ch); }
  Scalar at(Index r, Index c, Index ch) const { return data(r * width + c, ch); }
  bool same_shape(const BasicImage& o) const {
    return height == o.height && width == o.width && channels() == o.channels();
  }
  bool in_range(Scalar lo = Scalar(0), Scalar hi = Scalar(255)) const {
    return data.size() == 0 || (data.minCoeff() >= lo && data.maxCoeff() <= hi);
  }
  friend bool operator==(const BasicImage& a, const BasicImage& b) {
    return a.same_shape(b) && a.data.rows() == b.data.rows() && a.data == b.data;
  }
};

using Image = BasicImage<double>;
using Mask = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline const std::string kEmptyLabel = "empty";

struct MaskedImage {
  Image pixels;
  Mask mask;  // 1 = foreground
  std::string label;
  int domain_id = 0;
  std::optional<std::string> region_tag;

  /// Throws ArgumentError on a shape mismatch, non-binary mask, or pixels
  /// outside [0, 255].
  void validate() const;
  friend bool operator==(const MaskedImage& a, const MaskedImage& b) {
    return a.pixels == b.pixels && a.mask.rows() == b.mask.rows() &&
           a.mask.cols() == b.mask.cols() && a.mask == b.mask && a.label == b.label &&
           a.domain_id == b.domain_id && a.region_tag == b.region_tag;
  }
};

enum class CopyPastePolicy { kAll, kSameY, kSameRegion };

std::string_view policy_name(CopyPastePolicy policy);
CopyPastePolicy parse_policy(std::string_view name);

/// Empty backgrounds indexed by domain and region, plus the labels each domain
/// has observed (needed by the same-label policy).
class BackgroundPool {
 public:
  explicit BackgroundPool(std::string empty_label = kEmptyLabel);

  /// Throws ArgumentError unless `background` carries the empty label.
  void add_background(MaskedImage background);
  void observe_label(int domain_id, const std::string& label);
  /// Records example.label as observed at example.domain_id.
  void observe(const MaskedImage& example);

  /// Indices of valid backgrounds for `example`, ascending.
  std::vector<std::size_t> candidates(const MaskedImage& example, CopyPastePolicy policy) const;

  const MaskedImage& at(std::size_t i) const { return backgrounds_.at(i); }
  std::size_t size() const { return backgrounds_.size(); }
  const std::string& empty_label() const { return empty_label_; }
  bool has_observations() const { return !observed_.empty(); }

 private:
  std::string empty_label_;
  std::vector<MaskedImage> backgrounds_;
  std::map<int, std::vector<std::size_t>> by_domain_;
  std::map<std::string, std::vector<std::size_t>> by_region_;
  std::map<int, std::set<std::string>> observed_;
};

/// Pastes the masked foreground of `example` onto a background drawn uniformly
/// from the policy-filtered pool. Returns the input unchanged for an empty-label
/// example or an empty candidate set.
MaskedImage copy_paste(const MaskedImage& example, const BackgroundPool& pool,
                       CopyPastePolicy policy, std::uint64_t seed);

/// Optical-density basis for stain jitter. Rows are the H, E and DAB stain
/// vectors.
struct StainBasis {
  Eigen::Matrix3d od_matrix;
  double epsilon = 1e-6;
  double strength = 0.05;  // sigma; 0.05 to 0.1 is the usual range

  StainBasis();
  /// Throws ConfigError for a singular matrix, epsilon <= 0 or strength < 0.
  void validate() const;
};

/// Ruifrok and Johnston's normalized H/E/DAB optical densities.
Eigen::Matrix3d ruifrok_hed_matrix();

struct StainDraw {
  double alpha = 1.0;
  double beta = 0.0;
};

/// alpha ~ U(1 - s, 1 + s), beta ~ U(-s, s), once per image.
StainDraw draw_stain_parameters(double strength, std::uint64_t seed);

/// S = -log(x + eps) M^-1; P = exp(-(alpha S + beta) M) - eps, clipped to [0, 255].
Image stain_jitter_with(const Image& image, const StainBasis& basis, double alpha, double beta);
Image stain_jitter(const Image& image, const StainBasis& basis, std::uint64_t seed);

struct HueDraw {
  Eigen::VectorXd gain;
  Eigen::VectorXd bias;
};

/// Per channel, gain ~ U(max(0, 1 - s), 1 + s) and bias ~ U(-128 s, 128 s).
HueDraw draw_hue_parameters(Index channels, double strength, std::uint64_t seed);

/// Channel-wise gain and offset drawn once per image, clipped to [0, 255].
Image hue_jitter(const Image& image, double strength, std::uint64_t seed);

}  // namespace dgsim::pixel

#endif  // DGSIM_PIXEL_AUG_HPP
