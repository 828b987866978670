// Copyright (c) 2026 hyface authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "hyface/core/error.hpp"

namespace hyface {

// All on-disk binary formats in this project are little-endian. The helpers
// below assume a little-endian host (checked once at startup by the tests).

template <typename T>
void write_le(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) fail(ErrorCode::ParseError, "io", "unexpected end of stream");
  return value;
}

inline void write_string(std::ostream& os, const std::string& s) {
  write_le<uint32_t>(os, static_cast<uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& is) {
  auto n = read_le<uint32_t>(is);
  std::string s(n, '\0');
  is.read(s.data(), n);
  if (!is) fail(ErrorCode::ParseError, "io", "unexpected end of stream");
  return s;
}

inline void write_f64_vector(std::ostream& os, const std::vector<double>& v) {
  write_le<uint64_t>(os, v.size());
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(double)));
}

inline std::vector<double> read_f64_vector(std::istream& is) {
  auto n = read_le<uint64_t>(is);
  std::vector<double> v(n);
  is.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) fail(ErrorCode::ParseError, "io", "unexpected end of stream");
  return v;
}

inline std::string read_file_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::IoError, "io", "cannot open " + path.string());
  std::string s((std::istreambuf_iterator<char>(f)),
                std::istreambuf_iterator<char>());
  return s;
}

inline std::vector<uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::IoError, "io", "cannot open " + path.string());
  std::vector<uint8_t> out((std::istreambuf_iterator<char>(f)),
                           std::istreambuf_iterator<char>());
  return out;
}

// Write-then-rename so readers never observe a half-written file.
inline void write_file_atomic(const std::filesystem::path& path,
                              const std::string& contents) {
  namespace fs = std::filesystem;
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) fail(ErrorCode::IoError, "io", "cannot write " + tmp.string());
    f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  }
  fs::rename(tmp, path);
}

}  // namespace hyface
