#include "attnslam/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "attnslam/distance.hpp"
#include "attnslam/error.hpp"

namespace attnslam::reference {
namespace {

void normalize_range(const float* src, float* dst, std::size_t n) {
  float lo = std::numeric_limits<float>::infinity();
  float hi = -std::numeric_limits<float>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    lo = std::min(lo, src[i]);
    hi = std::max(hi, src[i]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    dst[i] = hi > lo ? static_cast<float>((static_cast<double>(src[i]) - lo) /
                                          (static_cast<double>(hi) - lo))
                     : 0.0f;
  }
}

}  // namespace

Tensor minmax_normalize(const Tensor& g, NormScope scope) {
  Tensor out(g.dims());
  if (scope == NormScope::kGlobal) {
    normalize_range(g.data().data(), out.data().data(), g.size());
  } else {
    const std::size_t plane = g.dims().plane();
    for (std::uint32_t c = 0; c < g.dims().channels; ++c) {
      normalize_range(g.data().data() + c * plane, out.data().data() + c * plane, plane);
    }
  }
  return out;
}

Tensor channel_saliency(const Tensor& g) {
  const TensorDims d = g.dims();
  if (d.channels == 0) throw ValidationError("channel_saliency: tensor has no channels");
  const std::size_t plane = d.plane();
  std::vector<double> summed(plane, 0.0);
  for (std::size_t p = 0; p < plane; ++p) {
    for (std::uint32_t c = 0; c < d.channels; ++c) {
      float lo = std::numeric_limits<float>::infinity();
      float hi = -std::numeric_limits<float>::infinity();
      for (std::size_t q = 0; q < plane; ++q) {
        lo = std::min(lo, g.data()[c * plane + q]);
        hi = std::max(hi, g.data()[c * plane + q]);
      }
      if (hi > lo) {
        summed[p] += (static_cast<double>(g.data()[c * plane + p]) - lo) / (static_cast<double>(hi) - lo);
      }
    }
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : summed) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  Tensor out(TensorDims{1, d.height, d.width});
  for (std::size_t p = 0; p < plane; ++p) {
    out.data()[p] = hi > lo ? static_cast<float>((summed[p] - lo) / (hi - lo)) : 0.0f;
  }
  return out;
}

Tensor fuse(const Tensor& l, const Tensor& g, FusionStrategy strategy) {
  if (!(l.dims() == g.dims())) throw ValidationError("fuse: activation and gradient dims differ");
  if (strategy == FusionStrategy::kBaseline) return l;

  const bool global = strategy == FusionStrategy::kGaf || strategy == FusionStrategy::kEga;
  const bool exponential = strategy == FusionStrategy::kEam || strategy == FusionStrategy::kEga;
  const Tensor mask = global ? reference::channel_saliency(g)
                              : reference::minmax_normalize(g, NormScope::kGlobal);
  const std::size_t plane = l.dims().plane();

  Tensor out(l.dims());
  for (std::uint32_t c = 0; c < l.dims().channels; ++c) {
    for (std::size_t p = 0; p < plane; ++p) {
      const float m = global ? mask.data()[p] : mask.data()[c * plane + p];
      const float factor = exponential ? static_cast<float>(std::exp(static_cast<double>(m))) : m;
      out.data()[c * plane + p] = l.data()[c * plane + p] * factor;
    }
  }
  return out;
}

std::vector<float> encode(const Tensor& f, const RandomRnnWeights& weights) {
  const EncoderConfig& cfg = weights.config();
  if (!(f.dims() == cfg.input_dims)) throw ValidationError("encode: input dims mismatch");
  const std::uint32_t pooled = f.dims().channels / 2;
  const std::uint32_t chunk = pooled / 4;
  const std::uint32_t height = f.dims().height;
  const std::uint32_t width = f.dims().width;
  const std::uint32_t out_width = 2 * width;

  // Child vector at output cell (y, x), channel c, read straight from f.
  std::vector<float> x(weights.cols());
  for (std::uint32_t y = 0; y < 2 * height; ++y) {
    for (std::uint32_t xx = 0; xx < out_width; ++xx) {
      const std::uint32_t q = (y % 2) * 2 + (xx % 2);
      for (std::uint32_t c = 0; c < chunk; ++c) {
        const std::uint32_t src_c = q * chunk + c;
        const float a = f.at(2 * src_c, y / 2, xx / 2);
        const float b = f.at(2 * src_c + 1, y / 2, xx / 2);
        x[(std::size_t{y} * out_width + xx) * chunk + c] = (a + b) * 0.5f;
      }
    }
  }

  std::vector<float> out(weights.rows());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto w = weights.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) acc += static_cast<double>(w[j]) * x[j];
    out[i] = std::clamp(static_cast<float>(std::tanh(acc)), -kTanhSaturation, kTanhSaturation);
  }
  return out;
}

std::vector<std::pair<std::uint32_t, float>> linear_knn(std::span<const float> points, std::size_t dim,
                                                         std::span<const float> query, std::size_t knn) {
  std::vector<std::pair<std::uint32_t, float>> all;
  if (dim == 0) return all;
  const std::size_t n = points.size() / dim;
  all.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    all.emplace_back(static_cast<std::uint32_t>(i), squared_distance(points.subspan(i * dim, dim), query));
  }
  const auto less = [](const auto& a, const auto& b) {
    return std::tie(a.second, a.first) < std::tie(b.second, b.first);
  };
  const std::size_t keep = std::min(knn, n);
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(), less);
  all.resize(keep);
  return all;
}

}  // namespace attnslam::reference
