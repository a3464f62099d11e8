#include "attnslam/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "attnslam/error.hpp"

namespace attnslam {

Tensor::Tensor(TensorDims dims) : dims_(dims), data_(dims.count(), 0.0f) {}

Tensor::Tensor(TensorDims dims, std::vector<float> data)
    : dims_(dims), data_(std::move(data)) {
  if (data_.size() != dims_.count()) {
    throw ValidationError("tensor data length " + std::to_string(data_.size()) +
                          " does not match dims " + std::to_string(dims_.channels) + "x" +
                          std::to_string(dims_.height) + "x" + std::to_string(dims_.width));
  }
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

}  // namespace attnslam
