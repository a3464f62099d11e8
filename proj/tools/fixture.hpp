#pragma once

#include <cstdint>
#include <filesystem>

namespace attnslam::cli {

struct SyntheticSequence {
  std::filesystem::path manifest;
  std::filesystem::path ground_truth;
  std::filesystem::path estimate;
  std::uint32_t frames = 0;
  std::uint32_t revisits = 0;
};

/// Writes a deterministic (512,7,7) activation/gradient sequence into `dir`:
/// frames 2 s apart on a 3 m circle, with the last `revisits` frames
/// repeating the tensors and poses of the first ones. Also writes
/// groundtruth.txt and a perturbed estimate.txt in TUM format.
SyntheticSequence write_synthetic_sequence(const std::filesystem::path& dir, std::uint32_t frames,
                                           std::uint32_t revisits, std::uint64_t seed);

}  // namespace attnslam::cli
