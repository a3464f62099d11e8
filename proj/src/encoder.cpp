#include "attnslam/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "attnslam/error.hpp"
#include "splitmix.hpp"

namespace attnslam {

void EncoderConfig::validate() const {
  if (num_rnns == 0) throw ValidationError("encoder: num_rnns must be >= 1");
  if (k == 0) throw ValidationError("encoder: k must be >= 1");
  if (input_dims.channels == 0 || input_dims.channels % 8 != 0) {
    throw ValidationError("encoder: input channel count must be a positive multiple of 8, got " +
                          std::to_string(input_dims.channels));
  }
  if (input_dims.height == 0 || input_dims.width == 0) {
    throw ValidationError("encoder: input spatial dims must be non-zero");
  }
}

float counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  const std::uint64_t key = detail::splitmix64_mix(seed ^ detail::splitmix64_mix(stream + detail::kGoldenGamma));
  const std::uint64_t z = detail::splitmix64_mix(key + (counter + 1) * detail::kGoldenGamma);
  // 24 random bits -> [-2^23, 2^23) -> [-1, 1), exact in float.
  const auto bits = static_cast<std::int32_t>(z >> 40) - (1 << 23);
  return static_cast<float>(bits) * (1.0f / static_cast<float>(1 << 23));
}

RandomRnnWeights::RandomRnnWeights(const EncoderConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  const std::size_t per_rnn = std::size_t{cfg_.k} * cols();
  values_.resize(rows() * cols());
  const std::ptrdiff_t nets = cfg_.num_rnns;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < nets; ++r) {
    float* dst = values_.data() + static_cast<std::size_t>(r) * per_rnn;
    for (std::size_t j = 0; j < per_rnn; ++j) {
      dst[j] = counter_uniform(cfg_.seed, static_cast<std::uint64_t>(r), j);
    }
  }
}

std::span<const float> RandomRnnWeights::matrix(std::uint32_t r) const {
  const std::size_t per_rnn = std::size_t{cfg_.k} * cols();
  return std::span<const float>(values_).subspan(r * per_rnn, per_rnn);
}

std::span<const float> RandomRnnWeights::row(std::size_t i) const {
  return std::span<const float>(values_).subspan(i * cols(), cols());
}

RandomRnnWeights make_weights(const EncoderConfig& cfg) { return RandomRnnWeights(cfg); }

Tensor channel_pair_pool(const Tensor& f) {
  const TensorDims d = f.dims();
  if (d.channels % 2 != 0) {
    throw ValidationError("channel_pair_pool: odd channel count " + std::to_string(d.channels));
  }
  Tensor out(TensorDims{d.channels / 2, d.height, d.width});
  const std::size_t plane = d.plane();
  const std::ptrdiff_t pairs = d.channels / 2;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < pairs; ++c) {
    const auto a = f.channel(static_cast<std::uint32_t>(2 * c));
    const auto b = f.channel(static_cast<std::uint32_t>(2 * c + 1));
    auto dst = out.channel(static_cast<std::uint32_t>(c));
    for (std::size_t p = 0; p < plane; ++p) dst[p] = (a[p] + b[p]) * 0.5f;
  }
  return out;
}

Tensor regrid(const Tensor& f) {
  const TensorDims d = f.dims();
  if (d.channels % 4 != 0) {
    throw ValidationError("regrid: channel count " + std::to_string(d.channels) +
                          " is not a multiple of 4");
  }
  const std::uint32_t chunk = d.channels / 4;
  Tensor out(TensorDims{chunk, 2 * d.height, 2 * d.width});
  for (std::uint32_t q = 0; q < 4; ++q) {
    for (std::uint32_t c = 0; c < chunk; ++c) {
      for (std::uint32_t h = 0; h < d.height; ++h) {
        for (std::uint32_t w = 0; w < d.width; ++w) {
          out.at(c, 2 * h + q / 2, 2 * w + q % 2) = f.at(q * chunk + c, h, w);
        }
      }
    }
  }
  return out;
}

std::vector<float> flatten_cells(const Tensor& f) {
  const TensorDims d = f.dims();
  std::vector<float> x(f.size());
  for (std::uint32_t c = 0; c < d.channels; ++c) {
    for (std::uint32_t h = 0; h < d.height; ++h) {
      for (std::uint32_t w = 0; w < d.width; ++w) {
        x[(std::size_t{h} * d.width + w) * d.channels + c] = f.at(c, h, w);
      }
    }
  }
  return x;
}

std::vector<float> encode(const Tensor& f, const RandomRnnWeights& weights) {
  const EncoderConfig& cfg = weights.config();
  if (!(f.dims() == cfg.input_dims)) {
    throw ValidationError("encode: expected input " + std::to_string(cfg.input_dims.channels) + "x" +
                          std::to_string(cfg.input_dims.height) + "x" +
                          std::to_string(cfg.input_dims.width) + ", got " +
                          std::to_string(f.dims().channels) + "x" +
                          std::to_string(f.dims().height) + "x" + std::to_string(f.dims().width));
  }
  const std::vector<float> x = flatten_cells(regrid(channel_pair_pool(f)));
  std::vector<float> out(weights.rows());
  const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(weights.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    const auto w = weights.row(static_cast<std::size_t>(i));
    double acc = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) acc += static_cast<double>(w[j]) * x[j];
    const float v = static_cast<float>(std::tanh(acc));
    out[i] = std::clamp(v, -kTanhSaturation, kTanhSaturation);
  }
  return out;
}

}  // namespace attnslam
