#pragma once

// Little-endian binary primitives shared by the LBS1 / DSC1 / SMN1 writers.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include <Eigen/Core>

#include "specmatch/error.hpp"

namespace specmatch::binio {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

inline std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(v);
  return v;
}

class Writer {
public:
  explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary), path_(path.string()) {
    require(out_.good(), ErrorCode::IoError, "cannot write " + path_);
  }

  void magic(const char tag[5]) { out_.write(tag, 4); }
  void u8(std::uint8_t v) { out_.write(reinterpret_cast<const char*>(&v), 1); }
  void u64(std::uint64_t v) {
    const std::uint64_t le = to_le(v);
    out_.write(reinterpret_cast<const char*>(&le), 8);
  }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
  }
  void f64_array(const double* data, std::size_t count) {
    if constexpr (std::endian::native == std::endian::little) {
      out_.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * 8));
    } else {
      for (std::size_t i = 0; i < count; ++i) f64(data[i]);
    }
  }
  void bytes(const void* data, std::size_t count) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(count));
  }
  void close() {
    out_.close();
    require(!out_.fail(), ErrorCode::IoError, "write failed for " + path_);
  }

private:
  std::ofstream out_;
  std::string path_;
};

class Reader {
public:
  explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary), path_(path.string()) {
    require(std::filesystem::exists(path), ErrorCode::MissingFile, path_);
    require(in_.good(), ErrorCode::IoError, "cannot read " + path_);
  }

  void expect_magic(const char tag[5]) {
    char buf[4];
    in_.read(buf, 4);
    require(in_.good() && std::memcmp(buf, tag, 4) == 0, ErrorCode::ParseError,
            path_ + ": bad magic, expected " + tag);
  }
  std::uint8_t u8() {
    std::uint8_t v;
    in_.read(reinterpret_cast<char*>(&v), 1);
    check();
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    in_.read(reinterpret_cast<char*>(&v), 8);
    check();
    return to_le(v);
  }
  double f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  void f64_array(double* data, std::size_t count) {
    if constexpr (std::endian::native == std::endian::little) {
      in_.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * 8));
      check();
    } else {
      for (std::size_t i = 0; i < count; ++i) data[i] = f64();
    }
  }
  void bytes(void* data, std::size_t count) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(count));
    check();
  }

private:
  void check() { require(in_.good(), ErrorCode::ParseError, path_ + ": truncated file"); }

  std::ifstream in_;
  std::string path_;
};

}  // namespace specmatch::binio
