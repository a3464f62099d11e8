#pragma once

#include <cstddef>
#include <span>

namespace attnslam {

/// Squared Euclidean distance with a fixed eight-lane summation order, so the
/// result is reproducible and vectorizes without relaxed float semantics.
inline float squared_distance(std::span<const float> a, std::span<const float> b) {
  float acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  const std::size_t n = a.size();
  const std::size_t body = n - n % 8;
  for (std::size_t i = 0; i < body; i += 8) {
    for (std::size_t j = 0; j < 8; ++j) {
      const float d = a[i + j] - b[i + j];
      acc[j] += d * d;
    }
  }
  for (std::size_t i = body; i < n; ++i) {
    const float d = a[i] - b[i];
    acc[i - body] += d * d;
  }
  return ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7]));
}

}  // namespace attnslam
