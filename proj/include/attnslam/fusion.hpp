#pragma once

#include <optional>
#include <string_view>

#include "attnslam/tensor.hpp"

namespace attnslam {

/// How gradient attention modulates layer activations.
enum class FusionStrategy {
  kBaseline,  // F = L
  kDam,       // F = L * N(G)
  kEam,       // F = L * exp(N(G))
  kGaf,       // F = L * S, S = channel_saliency(G) broadcast over channels
  kEga,       // F = L * exp(S)
};

enum class NormScope { kGlobal, kPerChannel };

std::string_view to_string(FusionStrategy s);
/// Accepts lower-case names: baseline, dam, eam, gaf, ega.
std::optional<FusionStrategy> parse_fusion_strategy(std::string_view name);

/// Min-max scales `g` into [0,1] over the whole tensor or independently per
/// channel. A scope whose values are all equal maps to zeros.
Tensor minmax_normalize(const Tensor& g, NormScope scope);

/// Two-stage saliency map of shape (1,H,W): normalize each channel, sum
/// across channels, then normalize the summed map globally.
Tensor channel_saliency(const Tensor& g);

/// Attention-guided features. Throws ValidationError when dims differ.
Tensor fuse(const Tensor& l, const Tensor& g, FusionStrategy strategy);

}  // namespace attnslam
