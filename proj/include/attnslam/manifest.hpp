#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace attnslam {

struct FrameRecord {
  std::uint64_t frame_id = 0;
  double timestamp = 0.0;
  std::filesystem::path activation_path;
  std::filesystem::path gradient_path;
};

/// Links the frames of one sequence to their activation/gradient tensors.
/// Frame ids are unique and strictly increasing, and so are timestamps.
struct SequenceManifest {
  std::string sequence_name;
  std::string layer_id;
  std::vector<FrameRecord> frames;
};

/// Parses and validates a JSON manifest. Relative tensor paths are resolved
/// against `base_dir`.
SequenceManifest parse_manifest(std::string_view json_text,
                                const std::filesystem::path& base_dir);

/// Reads a manifest file; relative paths resolve against its directory.
SequenceManifest read_manifest(const std::filesystem::path& path);

/// Writes paths as given (relative paths stay relative).
void write_manifest(const SequenceManifest& manifest,
                    const std::filesystem::path& path);

}  // namespace attnslam
