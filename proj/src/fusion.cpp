#include "attnslam/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "attnslam/error.hpp"

namespace attnslam {
namespace {

struct Range {
  float lo = std::numeric_limits<float>::infinity();
  float hi = -std::numeric_limits<float>::infinity();
};

Range global_range(std::span<const float> v) {
  float lo = std::numeric_limits<float>::infinity();
  float hi = -std::numeric_limits<float>::infinity();
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(v.size());
  const float* p = v.data();
#pragma omp parallel for reduction(min : lo) reduction(max : hi) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    lo = std::min(lo, p[i]);
    hi = std::max(hi, p[i]);
  }
  return {lo, hi};
}

Range serial_range(std::span<const float> v) {
  Range r;
  for (float x : v) {
    r.lo = std::min(r.lo, x);
    r.hi = std::max(r.hi, x);
  }
  return r;
}

// Rescales src into dst; constant input maps to zeros.
void rescale(std::span<const float> src, Range r, std::span<float> dst) {
  if (!(r.hi > r.lo)) {
    std::fill(dst.begin(), dst.end(), 0.0f);
    return;
  }
  const double lo = r.lo;
  const double span = static_cast<double>(r.hi) - lo;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(src.size());
#pragma omp parallel for schedule(static) if (n > 4096)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    dst[i] = static_cast<float>((static_cast<double>(src[i]) - lo) / span);
  }
}

// Per-pixel multiplier broadcast across channels, or a full-size mask.
Tensor modulate(const Tensor& l, const Tensor& mask, bool exponential) {
  Tensor out(l.dims());
  const std::size_t plane = l.dims().plane();
  const bool broadcast = mask.dims().channels == 1 && l.dims().channels != 1;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(l.size());
  const float* lp = l.data().data();
  const float* mp = mask.data().data();
  float* op = out.data().data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const float m = mp[broadcast ? static_cast<std::size_t>(i) % plane : static_cast<std::size_t>(i)];
    const float factor = exponential ? static_cast<float>(std::exp(static_cast<double>(m))) : m;
    op[i] = lp[i] * factor;
  }
  return out;
}

}  // namespace

std::string_view to_string(FusionStrategy s) {
  switch (s) {
    case FusionStrategy::kBaseline: return "baseline";
    case FusionStrategy::kDam: return "dam";
    case FusionStrategy::kEam: return "eam";
    case FusionStrategy::kGaf: return "gaf";
    case FusionStrategy::kEga: return "ega";
  }
  return "unknown";
}

std::optional<FusionStrategy> parse_fusion_strategy(std::string_view name) {
  for (auto s : {FusionStrategy::kBaseline, FusionStrategy::kDam, FusionStrategy::kEam,
                 FusionStrategy::kGaf, FusionStrategy::kEga}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

Tensor minmax_normalize(const Tensor& g, NormScope scope) {
  Tensor out(g.dims());
  if (g.size() == 0) return out;
  if (scope == NormScope::kGlobal) {
    rescale(g.data(), global_range(g.data()), out.data());
    return out;
  }
  const std::ptrdiff_t channels = g.dims().channels;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < channels; ++c) {
    const auto src = g.channel(static_cast<std::uint32_t>(c));
    rescale(src, serial_range(src), out.channel(static_cast<std::uint32_t>(c)));
  }
  return out;
}

Tensor channel_saliency(const Tensor& g) {
  const TensorDims d = g.dims();
  const std::size_t plane = d.plane();
  if (d.channels == 0) throw ValidationError("channel_saliency: tensor has no channels");

  std::vector<Range> ranges(d.channels);
  const std::ptrdiff_t channels = d.channels;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < channels; ++c) {
    ranges[c] = serial_range(g.channel(static_cast<std::uint32_t>(c)));
  }

  // Sum of per-channel normalized values, channel order fixed per pixel.
  std::vector<double> summed(plane, 0.0);
  const std::ptrdiff_t np = static_cast<std::ptrdiff_t>(plane);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < np; ++p) {
    double acc = 0.0;
    for (std::uint32_t c = 0; c < d.channels; ++c) {
      const Range r = ranges[c];
      if (r.hi > r.lo) {
        const double lo = r.lo;
        acc += (static_cast<double>(g.channel(c)[p]) - lo) / (static_cast<double>(r.hi) - lo);
      }
    }
    summed[p] = acc;
  }

  const auto [lo_it, hi_it] = std::minmax_element(summed.begin(), summed.end());
  Tensor out(TensorDims{1, d.height, d.width});
  if (plane == 0) return out;
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (hi > lo) {
    for (std::size_t p = 0; p < plane; ++p) {
      out.data()[p] = static_cast<float>((summed[p] - lo) / (hi - lo));
    }
  }
  return out;
}

Tensor fuse(const Tensor& l, const Tensor& g, FusionStrategy strategy) {
  if (!(l.dims() == g.dims())) {
    throw ValidationError("fuse: activation and gradient dims differ");
  }
  switch (strategy) {
    case FusionStrategy::kBaseline: return l;
    case FusionStrategy::kDam: return modulate(l, minmax_normalize(g, NormScope::kGlobal), false);
    case FusionStrategy::kEam: return modulate(l, minmax_normalize(g, NormScope::kGlobal), true);
    case FusionStrategy::kGaf: return modulate(l, channel_saliency(g), false);
    case FusionStrategy::kEga: return modulate(l, channel_saliency(g), true);
  }
  throw ValidationError("fuse: unknown strategy");
}

}  // namespace attnslam
