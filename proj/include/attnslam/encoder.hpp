#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "attnslam/tensor.hpp"

namespace attnslam {

/// Random recursive-network encoder settings. With the defaults a (512,7,7)
/// block-5 tensor becomes a 16 x 64 = 1024 element descriptor.
struct EncoderConfig {
  std::uint32_t num_rnns = 16;
  std::uint32_t k = 64;
  std::uint64_t seed = 0;
  TensorDims input_dims{512, 7, 7};

  std::size_t descriptor_length() const { return std::size_t{num_rnns} * k; }
  /// Length of the flattened child grid fed to each network (12544 by default).
  std::size_t input_length() const { return input_dims.count() / 2; }

  /// Throws ValidationError on a zero count or an input channel count that
  /// cannot be pair-pooled and split into four chunks.
  void validate() const;
};

/// Uniform value in [-1, 1) that depends only on (seed, stream, counter).
/// SplitMix64 finalizer over a keyed counter; identical on every platform.
float counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

/// Fixed random merge matrices, one k x input_length block per network,
/// row-major. Immutable once built.
class RandomRnnWeights {
 public:
  explicit RandomRnnWeights(const EncoderConfig& cfg);

  const EncoderConfig& config() const { return cfg_; }
  std::size_t rows() const { return cfg_.descriptor_length(); }
  std::size_t cols() const { return cfg_.input_length(); }

  /// Matrix of network `r` (k rows).
  std::span<const float> matrix(std::uint32_t r) const;
  /// Row `i` of the stacked (num_rnns*k) x input_length matrix.
  std::span<const float> row(std::size_t i) const;
  std::span<const float> data() const { return values_; }

 private:
  EncoderConfig cfg_;
  std::vector<float> values_;
};

RandomRnnWeights make_weights(const EncoderConfig& cfg);

/// out[c] = (f[2c] + f[2c+1]) / 2. Throws ValidationError on odd C.
Tensor channel_pair_pool(const Tensor& f);

/// (C,H,W) -> (C/4, 2H, 2W). The C-vector at cell (h,w) is cut into four
/// contiguous chunks; chunk q lands at (2h + q/2, 2w + q%2).
/// Throws ValidationError when C is not a multiple of 4.
Tensor regrid(const Tensor& f);

/// Concatenates the per-cell channel vectors in row-major cell order.
std::vector<float> flatten_cells(const Tensor& f);

/// tanh(W_r x) for every network r, concatenated. x is the flattened child
/// grid of regrid(channel_pair_pool(f)). Outputs are clamped to the open
/// interval (-1, 1) at float precision.
std::vector<float> encode(const Tensor& f, const RandomRnnWeights& weights);

/// Largest float below 1; tanh outputs saturate here.
inline constexpr float kTanhSaturation = 0.99999994f;

}  // namespace attnslam
