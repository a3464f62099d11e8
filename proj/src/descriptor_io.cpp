#include "attnslam/descriptor_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include "attnslam/error.hpp"
#include "byte_io.hpp"

namespace attnslam {

void write_descriptor_set(const std::vector<Descriptor>& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  detail::ByteWriter w(out);
  w.put_bytes(kDescriptorSetMagic);
  w.put<std::uint32_t>(kDescriptorSetVersion);
  w.put<std::uint64_t>(set.size());
  for (const Descriptor& d : set) {
    if (d.values.size() > std::numeric_limits<std::uint32_t>::max()) {
      throw ValidationError("descriptor too long");
    }
    w.put<std::uint64_t>(d.frame_id);
    w.put<double>(d.timestamp);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(d.values.size()));
    w.put_floats(d.values);
  }
  out.flush();
  w.check(path.string().c_str());
}

std::vector<Descriptor> read_descriptor_set(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open descriptor set: " + path.string());
  detail::ByteReader r(in, "descriptor set");
  char magic[4];
  r.get_bytes(magic);
  if (std::memcmp(magic, kDescriptorSetMagic, 4) != 0) {
    throw FormatError(path.string() + ": bad descriptor-set magic");
  }
  if (const auto v = r.get<std::uint32_t>(); v != kDescriptorSetVersion) {
    throw FormatError(path.string() + ": unsupported descriptor-set version " + std::to_string(v));
  }
  const auto count = r.get<std::uint64_t>();
  std::vector<Descriptor> set;
  for (std::uint64_t i = 0; i < count; ++i) {
    Descriptor d;
    d.frame_id = r.get<std::uint64_t>();
    d.timestamp = r.get<double>();
    const auto len = r.get<std::uint32_t>();
    if (const auto left = r.remaining(); left >= 0 && left < static_cast<std::streamoff>(len) * 4) {
      throw FormatError(path.string() + ": truncated descriptor payload");
    }
    d.values.resize(len);
    r.get_floats(d.values);
    for (float v : d.values) {
      if (!std::isfinite(v)) throw ValidationError(path.string() + ": non-finite descriptor value");
    }
    set.push_back(std::move(d));
  }
  if (!r.at_end()) throw FormatError(path.string() + ": trailing bytes after descriptor set");
  return set;
}

}  // namespace attnslam
