#include "attnslam/tensor_io.hpp"

#include <cstring>
#include <fstream>
#include <string>

#include "attnslam/error.hpp"
#include "byte_io.hpp"

namespace attnslam {

std::size_t write_tensor(const Tensor& t, std::ostream& out) {
  if (!t.all_finite()) throw ValidationError("tensor contains NaN or Inf");
  detail::ByteWriter w(out);
  w.put_bytes(kTensorMagic);
  w.put<std::uint32_t>(kTensorFormatVersion);
  w.put<std::uint8_t>(kDtypeFloat32);
  w.put<std::uint8_t>(3);
  w.put<std::uint32_t>(t.dims().channels);
  w.put<std::uint32_t>(t.dims().height);
  w.put<std::uint32_t>(t.dims().width);
  w.put_floats(t.data());
  w.check("tensor");
  return w.written();
}

std::size_t write_tensor(const Tensor& t, const std::filesystem::path& path) {
  if (!t.all_finite()) throw ValidationError("tensor contains NaN or Inf: " + path.string());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  const std::size_t n = write_tensor(t, out);
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
  return n;
}

Tensor read_tensor(std::istream& in) {
  detail::ByteReader r(in, "tensor");
  char magic[4];
  r.get_bytes(magic);
  if (std::memcmp(magic, kTensorMagic, 4) != 0) throw FormatError("tensor: bad magic");
  if (const auto version = r.get<std::uint32_t>(); version != kTensorFormatVersion) {
    throw FormatError("tensor: unsupported version " + std::to_string(version));
  }
  if (const auto dtype = r.get<std::uint8_t>(); dtype != kDtypeFloat32) {
    throw FormatError("tensor: unsupported dtype code " + std::to_string(dtype));
  }
  if (const auto rank = r.get<std::uint8_t>(); rank != 3) {
    throw FormatError("tensor: unsupported rank " + std::to_string(rank));
  }
  TensorDims dims;
  dims.channels = r.get<std::uint32_t>();
  dims.height = r.get<std::uint32_t>();
  dims.width = r.get<std::uint32_t>();

  const auto payload = static_cast<std::streamoff>(dims.count() * sizeof(float));
  if (const auto left = r.remaining(); left >= 0 && left < payload) {
    throw FormatError("tensor: truncated payload (" + std::to_string(left) + " of " +
                      std::to_string(payload) + " bytes)");
  }

  std::vector<float> data(dims.count());
  r.get_floats(data);
  if (!r.at_end()) throw FormatError("tensor: trailing bytes after payload");

  Tensor t(dims, std::move(data));
  if (!t.all_finite()) throw ValidationError("tensor: NaN or Inf in payload");
  return t;
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open tensor file: " + path.string());
  try {
    return read_tensor(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace attnslam
