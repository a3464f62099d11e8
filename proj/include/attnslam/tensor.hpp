#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace attnslam {

struct TensorDims {
  std::uint32_t channels = 0;
  std::uint32_t height = 0;
  std::uint32_t width = 0;

  std::size_t plane() const { return std::size_t{height} * width; }
  std::size_t count() const { return std::size_t{channels} * plane(); }

  friend bool operator==(const TensorDims&, const TensorDims&) = default;
};

/// Dense rank-3 float32 tensor, channel-major: index = c*H*W + h*W + w.
class Tensor {
 public:
  Tensor() = default;
  /// Zero-filled tensor.
  explicit Tensor(TensorDims dims);
  /// Throws ValidationError if data.size() != dims.count().
  Tensor(TensorDims dims, std::vector<float> data);

  const TensorDims& dims() const { return dims_; }
  std::size_t size() const { return data_.size(); }

  std::span<const float> data() const { return data_; }
  std::span<float> data() { return data_; }

  std::span<const float> channel(std::uint32_t c) const {
    return std::span<const float>(data_).subspan(c * dims_.plane(), dims_.plane());
  }
  std::span<float> channel(std::uint32_t c) {
    return std::span<float>(data_).subspan(c * dims_.plane(), dims_.plane());
  }

  float at(std::uint32_t c, std::uint32_t h, std::uint32_t w) const {
    return data_[index(c, h, w)];
  }
  float& at(std::uint32_t c, std::uint32_t h, std::uint32_t w) {
    return data_[index(c, h, w)];
  }

  /// True when every element is finite.
  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::size_t index(std::uint32_t c, std::uint32_t h, std::uint32_t w) const {
    return c * dims_.plane() + std::size_t{h} * dims_.width + w;
  }

  TensorDims dims_;
  std::vector<float> data_;
};

}  // namespace attnslam
