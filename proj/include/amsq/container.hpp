// Copyright 2026 The amsq Authors
// SPDX-License-Identifier: Apache-2.0
//
// AMSQ container v1, all little-endian:
//   "AMSQ" | u16 version=1 | u8 scheme id | u8 k | u32 rows | u32 cols |
//   u32 padded_cols | rows x u16 scales | u64 payload_len | payload bytes
//
// Scheme ids: 0 fp4-e2m1, 1 fp5-e2m2, 2 fp6-e2m3, 3 fp6-e3m2, 4 fp4.25-e2m2,
// 5 fp4.33-e2m2, 6 fp4.5-e2m2, 7 fp5.33-e2m3.

#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "amsq/quantize.hpp"

namespace amsq {

namespace detail {

inline void put_u16(std::ostream& out, std::uint16_t v) {
  const unsigned char b[2] = {static_cast<unsigned char>(v & 0xFF),
                              static_cast<unsigned char>((v >> 8) & 0xFF)};
  out.write(reinterpret_cast<const char*>(b), 2);
}

inline void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF),
                              static_cast<unsigned char>((v >> 8) & 0xFF),
                              static_cast<unsigned char>((v >> 16) & 0xFF),
                              static_cast<unsigned char>((v >> 24) & 0xFF)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    const unsigned char b = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<const char*>(&b), 1);
  }
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char b[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(b), sizeof(T))) {
    throw std::runtime_error("truncated container");
  }
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v = static_cast<T>(v | (static_cast<std::uint64_t>(b[i]) << (8 * i)));
  }
  return v;
}

}  // namespace detail

inline void write_amsq(std::ostream& out, const QuantizedTensor& qt) {
  out.write("AMSQ", 4);
  detail::put_u16(out, 1);
  const unsigned char id = static_cast<unsigned char>(qt.scheme->id);
  out.write(reinterpret_cast<const char*>(&id), 1);
  const unsigned char k = static_cast<unsigned char>(qt.scheme->k);
  out.write(reinterpret_cast<const char*>(&k), 1);
  detail::put_u32(out, static_cast<std::uint32_t>(qt.rows));
  detail::put_u32(out, static_cast<std::uint32_t>(qt.cols));
  detail::put_u32(out, static_cast<std::uint32_t>(qt.padded_cols));
  for (std::uint16_t s : qt.scales) detail::put_u16(out, s);
  detail::put_u64(out, static_cast<std::uint64_t>(qt.payload_bytes()));
  for (std::uint16_t w : qt.payload) detail::put_u16(out, w);
  if (!out) throw std::runtime_error("container write failed");
}

inline QuantizedTensor read_amsq(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "AMSQ", 4) != 0) {
    throw std::runtime_error("bad container magic");
  }
  if (detail::get_le<std::uint16_t>(in) != 1) {
    throw std::runtime_error("unsupported container version");
  }
  const auto id = detail::get_le<std::uint8_t>(in);
  const auto k = detail::get_le<std::uint8_t>(in);
  const QuantScheme& scheme = scheme_by_id(id);
  if (k != scheme.k) throw std::runtime_error("container k/scheme mismatch");

  QuantizedTensor qt;
  qt.scheme = &scheme;
  qt.rows = detail::get_le<std::uint32_t>(in);
  qt.cols = detail::get_le<std::uint32_t>(in);
  qt.padded_cols = detail::get_le<std::uint32_t>(in);
  const PackLayout& layout = layout_of(scheme);
  if (qt.rows == 0 || qt.cols == 0 || qt.padded_cols < qt.cols ||
      qt.padded_cols % layout.block != 0 ||
      qt.padded_cols != round_up(qt.cols, layout.block)) {
    throw std::runtime_error("container shape is invalid");
  }
  qt.scales.resize(qt.rows);
  for (auto& s : qt.scales) s = detail::get_le<std::uint16_t>(in);
  const auto payload_len = detail::get_le<std::uint64_t>(in);
  const std::uint64_t expected =
      static_cast<std::uint64_t>(qt.rows) *
      packed_words_per_row(layout, qt.padded_cols) * 2;
  if (payload_len != expected) {
    throw std::runtime_error("container payload length mismatch");
  }
  qt.payload.resize(payload_len / 2);
  for (auto& w : qt.payload) w = detail::get_le<std::uint16_t>(in);
  return qt;
}

inline void save_amsq(const std::string& path, const QuantizedTensor& qt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  write_amsq(out, qt);
}

inline QuantizedTensor load_amsq(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_amsq(in);
}

}  // namespace amsq
