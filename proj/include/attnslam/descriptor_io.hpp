#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace attnslam {

/// Per-frame encoder output.
struct Descriptor {
  std::uint64_t frame_id = 0;
  double timestamp = 0.0;
  std::vector<float> values;

  friend bool operator==(const Descriptor&, const Descriptor&) = default;
};

// Descriptor-set file, little-endian:
//   "ATDS" | u32 version=1 | u64 count
//   count x ( u64 frame_id | f64 timestamp | u32 length | length x f32 )
inline constexpr char kDescriptorSetMagic[4] = {'A', 'T', 'D', 'S'};
inline constexpr std::uint32_t kDescriptorSetVersion = 1;

void write_descriptor_set(const std::vector<Descriptor>& set,
                          const std::filesystem::path& path);
std::vector<Descriptor> read_descriptor_set(const std::filesystem::path& path);

}  // namespace attnslam
