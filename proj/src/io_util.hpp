#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "aeen/data.hpp"

namespace aeen::detail {

inline void append_u32(std::string& out, uint32_t v) {
  char b[4];
  b[0] = static_cast<char>(v & 0xff);
  b[1] = static_cast<char>((v >> 8) & 0xff);
  b[2] = static_cast<char>((v >> 16) & 0xff);
  b[3] = static_cast<char>((v >> 24) & 0xff);
  out.append(b, 4);
}

inline void append_u64(std::string& out, uint64_t v) {
  append_u32(out, static_cast<uint32_t>(v & 0xffffffffULL));
  append_u32(out, static_cast<uint32_t>(v >> 32));
}

inline void append_f32(std::string& out, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, 4);
  append_u32(out, bits);
}

inline void append_f64(std::string& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  append_u64(out, bits);
}

class ByteReader {
 public:
  ByteReader(const std::string& data, const std::string& what)
      : data_(data), what_(what) {}

  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 3; i >= 0; --i)
      v = (v << 8) | static_cast<unsigned char>(data_[pos_ + i]);
    pos_ += 4;
    return v;
  }

  uint64_t u64() {
    const uint64_t lo = u32();
    const uint64_t hi = u32();
    return lo | (hi << 32);
  }

  float f32() {
    const uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }

  double f64() {
    const uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }

  void magic(const char expected[4]) {
    need(4);
    if (std::memcmp(data_.data() + pos_, expected, 4) != 0)
      throw BadMagicError(what_ + ": bad magic");
    pos_ += 4;
  }

  size_t remaining() const { return data_.size() - pos_; }

  void expect_exhausted() {
    if (remaining() != 0)
      throw FileSizeError(what_ + ": " + std::to_string(remaining()) +
                          " unexpected trailing bytes");
  }

 private:
  void need(size_t n) {
    if (data_.size() - pos_ < n)
      throw FileSizeError(what_ + ": truncated file (needed " +
                          std::to_string(n) + " more bytes at offset " +
                          std::to_string(pos_) + ")");
  }

  const std::string& data_;
  std::string what_;
  size_t pos_ = 0;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on " + path);
  return data;
}

inline void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("write failure on " + path);
}

}  // namespace aeen::detail
