#pragma once

// Little-endian primitives shared by the binary formats.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <type_traits>

#include "attnslam/error.hpp"

namespace attnslam::detail {

template <typename T>
T to_little_endian(T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  } else {
    return v;
  }
}

class ByteWriter {
 public:
  explicit ByteWriter(std::ostream& out) : out_(out) {}

  template <typename T>
  void put(T v) {
    const T le = to_little_endian(v);
    out_.write(reinterpret_cast<const char*>(&le), sizeof(T));
    written_ += sizeof(T);
  }

  void put_bytes(std::span<const char> bytes) {
    out_.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    written_ += bytes.size();
  }

  void put_floats(std::span<const float> values) {
    if constexpr (std::endian::native == std::endian::little) {
      out_.write(reinterpret_cast<const char*>(values.data()),
                 static_cast<std::streamsize>(values.size_bytes()));
      written_ += values.size_bytes();
    } else {
      for (float v : values) put(v);
    }
  }

  void check(const char* what) const {
    if (!out_) throw IoError(std::string("failed writing ") + what);
  }

  std::size_t written() const { return written_; }

 private:
  std::ostream& out_;
  std::size_t written_ = 0;
};

class ByteReader {
 public:
  ByteReader(std::istream& in, const char* what) : in_(in), what_(what) {}

  template <typename T>
  T get() {
    T v;
    read_raw(reinterpret_cast<char*>(&v), sizeof(T));
    return to_little_endian(v);
  }

  void get_bytes(std::span<char> out) { read_raw(out.data(), out.size()); }

  void get_floats(std::span<float> out) {
    read_raw(reinterpret_cast<char*>(out.data()), out.size_bytes());
    if constexpr (std::endian::native == std::endian::big) {
      for (float& v : out) v = to_little_endian(v);
    }
  }

  /// Bytes left in a seekable stream, or -1 when the stream cannot seek.
  std::streamoff remaining() {
    const auto pos = in_.tellg();
    if (pos == std::streampos(-1)) return -1;
    in_.seekg(0, std::ios::end);
    const auto end = in_.tellg();
    in_.seekg(pos);
    return end - pos;
  }

  /// True when the stream has no bytes left.
  bool at_end() {
    return in_.peek() == std::char_traits<char>::eof();
  }

 private:
  void read_raw(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw FormatError(std::string(what_) + ": truncated data");
    }
  }

  std::istream& in_;
  const char* what_;
};

}  // namespace attnslam::detail
