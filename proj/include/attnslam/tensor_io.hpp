#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "attnslam/tensor.hpp"

namespace attnslam {

// On-disk tensor layout, all integers little-endian:
//   "ATNT" | u32 version=1 | u8 dtype=1 (float32) | u8 rank=3 | u32 C | u32 H | u32 W
//   followed by C*H*W little-endian float32 values.
inline constexpr char kTensorMagic[4] = {'A', 'T', 'N', 'T'};
inline constexpr std::uint32_t kTensorFormatVersion = 1;
inline constexpr std::uint8_t kDtypeFloat32 = 1;
inline constexpr std::size_t kTensorHeaderBytes = 22;

/// Returns the number of bytes written. Rejects non-finite values before
/// touching the destination.
std::size_t write_tensor(const Tensor& t, std::ostream& out);
std::size_t write_tensor(const Tensor& t, const std::filesystem::path& path);

Tensor read_tensor(std::istream& in);
Tensor read_tensor(const std::filesystem::path& path);

}  // namespace attnslam
