#pragma once

// Single-threaded reference versions of the OpenMP kernels. They share no
// code with the parallel paths and are kept for cross-checking and for the
// benchmark baseline.

#include <cstdint>
#include <span>
#include <vector>

#include "attnslam/encoder.hpp"
#include "attnslam/fusion.hpp"
#include "attnslam/tensor.hpp"

namespace attnslam::reference {

Tensor minmax_normalize(const Tensor& g, NormScope scope);
Tensor channel_saliency(const Tensor& g);
Tensor fuse(const Tensor& l, const Tensor& g, FusionStrategy strategy);

std::vector<float> encode(const Tensor& f, const RandomRnnWeights& weights);

/// Exhaustive k-nearest search over row-major `points` (n x dim). Returns
/// (id, squared distance) ascending by distance, ties by id.
std::vector<std::pair<std::uint32_t, float>> linear_knn(
    std::span<const float> points, std::size_t dim,
    std::span<const float> query, std::size_t knn);

}  // namespace attnslam::reference
