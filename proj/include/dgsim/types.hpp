#ifndef DGSIM_TYPES_HPP
#define DGSIM_TYPES_HPP

#include <Eigen/Dense>

#include <array>
#include <string_view>

#include "dgsim/errors.hpp"

namespace dgsim {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RowMatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Feature blocks of an input, in their fixed concatenation order.
enum class Block { kObj = 0, kNoise = 1, kCore = 2, kSpu = 3 };

inline constexpr std::array<Block, 4> kAllBlocks = {Block::kObj, Block::kNoise, Block::kCore,
                                                    Block::kSpu};

constexpr std::string_view block_name(Block b) {
  switch (b) {
    case Block::kObj:
      return "obj";
    case Block::kNoise:
      return "noise";
    case Block::kCore:
      return "core";
    case Block::kSpu:
      return "spu";
  }
  return "?";
}

/// Sizes of the four feature blocks. Core and spu are adjacent, so the
/// domain-dependent part is the contiguous tail [core, spu].
struct BlockLayout {
  Index obj = 0;
  Index noise = 0;
  Index core = 0;
  Index spu = 0;

  constexpr Index size(Block b) const {
    switch (b) {
      case Block::kObj:
        return obj;
      case Block::kNoise:
        return noise;
      case Block::kCore:
        return core;
      case Block::kSpu:
        return spu;
    }
    return 0;
  }
  constexpr Index offset(Block b) const {
    switch (b) {
      case Block::kObj:
        return 0;
      case Block::kNoise:
        return obj;
      case Block::kCore:
        return obj + noise;
      case Block::kSpu:
        return obj + noise + core;
    }
    return 0;
  }
  constexpr Index domain_offset() const { return obj + noise; }
  constexpr Index domain_size() const { return core + spu; }
  constexpr Index total() const { return obj + noise + core + spu; }

  friend constexpr bool operator==(const BlockLayout&, const BlockLayout&) = default;
};

/// A real vector split into [obj, noise, core, spu] blocks.
template <typename Scalar>
class BasicPartitionedVector {
 public:
  using Vector = VectorX<Scalar>;

  BasicPartitionedVector() = default;
  explicit BasicPartitionedVector(const BlockLayout& layout)
      : layout_(layout), values_(Vector::Zero(layout.total())) {}
  BasicPartitionedVector(const BlockLayout& layout, Vector values)
      : layout_(layout), values_(std::move(values)) {
    if (values_.size() != layout_.total()) {
      throw ArgumentError("partitioned vector length does not match block layout");
    }
  }

  const BlockLayout& layout() const { return layout_; }
  const Vector& values() const { return values_; }
  Vector& values() { return values_; }
  Index size() const { return values_.size(); }

  auto block(Block b) { return values_.segment(layout_.offset(b), layout_.size(b)); }
  auto block(Block b) const { return values_.segment(layout_.offset(b), layout_.size(b)); }

  auto obj() { return block(Block::kObj); }
  auto obj() const { return block(Block::kObj); }
  auto noise() { return block(Block::kNoise); }
  auto noise() const { return block(Block::kNoise); }
  auto core() { return block(Block::kCore); }
  auto core() const { return block(Block::kCore); }
  auto spu() { return block(Block::kSpu); }
  auto spu() const { return block(Block::kSpu); }
  /// [core, spu]
  auto domain() { return values_.segment(layout_.domain_offset(), layout_.domain_size()); }
  auto domain() const { return values_.segment(layout_.domain_offset(), layout_.domain_size()); }

  template <typename Other>
  BasicPartitionedVector<Other> cast() const {
    return BasicPartitionedVector<Other>(layout_, values_.template cast<Other>());
  }

  friend bool operator==(const BasicPartitionedVector& a, const BasicPartitionedVector& b) {
    return a.layout_ == b.layout_ && a.values_ == b.values_;
  }

 private:
  BlockLayout layout_{};
  Vector values_;
};

/// Weight vector partitioned like the input; prediction is a plain dot product.
template <typename Scalar>
class BasicLinearModel : public BasicPartitionedVector<Scalar> {
 public:
  using Base = BasicPartitionedVector<Scalar>;
  using Base::Base;

  explicit BasicLinearModel(Base weights) : Base(std::move(weights)) {}

  template <typename Derived>
  Scalar predict(const Eigen::MatrixBase<Derived>& x) const {
    return this->values().dot(x.template cast<Scalar>());
  }

  template <typename Other>
  BasicLinearModel<Other> cast() const {
    return BasicLinearModel<Other>(this->layout(), this->values().template cast<Other>());
  }
};

using PartitionedVector = BasicPartitionedVector<double>;
using LinearModel = BasicLinearModel<double>;

}  // namespace dgsim

#endif  // DGSIM_TYPES_HPP
