// Copyright 2026 The amsq Authors
// SPDX-License-Identifier: Apache-2.0
//
// Minimal NPY v1.0 reader/writer for 2-D little-endian float matrices.
// Accepted descrs are "<f4" and "<f2"; half data is widened to float on read.

#pragma once

#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "amsq/half.hpp"
#include "amsq/matrix.hpp"

namespace amsq {

enum class NpyDtype { f4, f2 };

namespace detail {

inline std::runtime_error npy_error(const std::string& what) {
  return std::runtime_error("parse error: " + what);
}

inline std::string header_value(const std::string& header,
                                const std::string& key) {
  const auto kpos = header.find("'" + key + "'");
  if (kpos == std::string::npos) throw npy_error("missing key " + key);
  auto pos = header.find(':', kpos);
  if (pos == std::string::npos) throw npy_error("malformed header");
  ++pos;
  while (pos < header.size() && header[pos] == ' ') ++pos;
  if (pos >= header.size()) throw npy_error("malformed header");
  if (header[pos] == '\'') {
    const auto end = header.find('\'', pos + 1);
    if (end == std::string::npos) throw npy_error("malformed header");
    return header.substr(pos + 1, end - pos - 1);
  }
  if (header[pos] == '(') {
    const auto end = header.find(')', pos);
    if (end == std::string::npos) throw npy_error("malformed header");
    return header.substr(pos, end - pos + 1);
  }
  auto end = header.find_first_of(",}", pos);
  if (end == std::string::npos) end = header.size();
  std::string v = header.substr(pos, end - pos);
  while (!v.empty() && v.back() == ' ') v.pop_back();
  return v;
}

inline std::vector<std::size_t> parse_shape(const std::string& tuple) {
  std::vector<std::size_t> dims;
  std::size_t pos = 1;  // skip '('
  while (pos < tuple.size()) {
    while (pos < tuple.size() && (tuple[pos] == ' ' || tuple[pos] == ',')) {
      ++pos;
    }
    if (pos >= tuple.size() || tuple[pos] == ')') break;
    if (!std::isdigit(static_cast<unsigned char>(tuple[pos]))) {
      throw npy_error("bad shape tuple");
    }
    std::size_t dim = 0;
    while (pos < tuple.size() &&
           std::isdigit(static_cast<unsigned char>(tuple[pos]))) {
      dim = dim * 10 + static_cast<std::size_t>(tuple[pos] - '0');
      ++pos;
    }
    dims.push_back(dim);
  }
  return dims;
}

}  // namespace detail

/// Reads a 2-D "<f4" or "<f2" NPY v1.0 payload; "<f2" widens to float.
inline Matrix read_npy(std::istream& in) {
  char magic[8];
  if (!in.read(magic, 8)) throw detail::npy_error("truncated NPY preamble");
  if (std::memcmp(magic, "\x93NUMPY", 6) != 0) {
    throw detail::npy_error("bad NPY magic");
  }
  if (magic[6] != 1 || magic[7] != 0) {
    throw detail::npy_error("unsupported NPY version");
  }
  unsigned char len_bytes[2];
  if (!in.read(reinterpret_cast<char*>(len_bytes), 2)) {
    throw detail::npy_error("truncated NPY header");
  }
  const std::size_t header_len =
      static_cast<std::size_t>(len_bytes[0]) |
      (static_cast<std::size_t>(len_bytes[1]) << 8);
  std::string header(header_len, '\0');
  if (!in.read(header.data(), static_cast<std::streamsize>(header_len))) {
    throw detail::npy_error("truncated NPY header");
  }

  const std::string descr = detail::header_value(header, "descr");
  NpyDtype dtype;
  if (descr == "<f4") {
    dtype = NpyDtype::f4;
  } else if (descr == "<f2") {
    dtype = NpyDtype::f2;
  } else {
    throw detail::npy_error("unsupported descr " + descr);
  }
  if (detail::header_value(header, "fortran_order") != "False") {
    throw detail::npy_error("fortran_order is not supported");
  }
  const auto dims =
      detail::parse_shape(detail::header_value(header, "shape"));
  if (dims.size() != 2 || dims[0] == 0 || dims[1] == 0) {
    throw detail::npy_error("expected a non-empty 2-D shape");
  }

  Matrix m(dims[0], dims[1]);
  const std::size_t n = m.size();
  if (dtype == NpyDtype::f4) {
    std::vector<unsigned char> raw(n * 4);
    if (!in.read(reinterpret_cast<char*>(raw.data()),
                 static_cast<std::streamsize>(raw.size()))) {
      throw detail::npy_error("truncated NPY data");
    }
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t bits = static_cast<std::uint32_t>(raw[4 * i]) |
                           (static_cast<std::uint32_t>(raw[4 * i + 1]) << 8) |
                           (static_cast<std::uint32_t>(raw[4 * i + 2]) << 16) |
                           (static_cast<std::uint32_t>(raw[4 * i + 3]) << 24);
      std::memcpy(&m.data[i], &bits, 4);
    }
  } else {
    std::vector<unsigned char> raw(n * 2);
    if (!in.read(reinterpret_cast<char*>(raw.data()),
                 static_cast<std::streamsize>(raw.size()))) {
      throw detail::npy_error("truncated NPY data");
    }
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint16_t bits =
          static_cast<std::uint16_t>(raw[2 * i]) |
          static_cast<std::uint16_t>(raw[2 * i + 1] << 8);
      m.data[i] = half_to_float(bits);
    }
  }
  return m;
}

inline Matrix read_npy(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_npy(in);
}

namespace detail {

inline void write_npy_header(std::ostream& out, const char* descr,
                             std::size_t rows, std::size_t cols) {
  std::string dict = "{'descr': '" + std::string(descr) +
                     "', 'fortran_order': False, 'shape': (" +
                     std::to_string(rows) + ", " + std::to_string(cols) +
                     "), }";
  const std::size_t unpadded = 10 + dict.size() + 1;
  dict.append((64 - unpadded % 64) % 64, ' ');
  dict.push_back('\n');
  out.write("\x93NUMPY\x01\x00", 8);
  const std::size_t hlen = dict.size();
  const unsigned char len_bytes[2] = {
      static_cast<unsigned char>(hlen & 0xFF),
      static_cast<unsigned char>((hlen >> 8) & 0xFF)};
  out.write(reinterpret_cast<const char*>(len_bytes), 2);
  out.write(dict.data(), static_cast<std::streamsize>(dict.size()));
}

}  // namespace detail

inline void write_npy(std::ostream& out, const Matrix& m) {
  detail::write_npy_header(out, "<f4", m.rows, m.cols);
  for (float v : m.data) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    const unsigned char b[4] = {
        static_cast<unsigned char>(bits & 0xFF),
        static_cast<unsigned char>((bits >> 8) & 0xFF),
        static_cast<unsigned char>((bits >> 16) & 0xFF),
        static_cast<unsigned char>((bits >> 24) & 0xFF)};
    out.write(reinterpret_cast<const char*>(b), 4);
  }
}

inline void write_npy_half(std::ostream& out,
                           std::span<const std::uint16_t> halves,
                           std::size_t rows, std::size_t cols) {
  if (halves.size() != rows * cols) {
    throw std::invalid_argument("write_npy_half: shape mismatch");
  }
  detail::write_npy_header(out, "<f2", rows, cols);
  for (std::uint16_t h : halves) {
    const unsigned char b[2] = {static_cast<unsigned char>(h & 0xFF),
                                static_cast<unsigned char>((h >> 8) & 0xFF)};
    out.write(reinterpret_cast<const char*>(b), 2);
  }
}

inline void write_npy(const std::string& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  write_npy(out, m);
}

inline void write_npy_half(const std::string& path,
                           std::span<const std::uint16_t> halves,
                           std::size_t rows, std::size_t cols) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  write_npy_half(out, halves, rows, cols);
}

}  // namespace amsq
