// Copyright 2026 The amsq Authors
// SPDX-License-Identifier: Apache-2.0
//
// Quantization schemes: a base minifloat format plus the mantissa-sharing
// group size k. k > 1 shaves the shared LSB off every weight, giving the
// fractional effective bit-widths (x-1) + 1/k.

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "amsq/format.hpp"

namespace amsq {

enum class SchemeId : std::uint8_t {
  fp4_e2m1 = 0,
  fp5_e2m2 = 1,
  fp6_e2m3 = 2,
  fp6_e3m2 = 3,
  fp4_25_e2m2 = 4,
  fp4_33_e2m2 = 5,
  fp4_5_e2m2 = 6,
  fp5_33_e2m3 = 7,
};

struct QuantScheme {
  SchemeId id;
  FloatFormat base_format;
  int k;  // weights sharing one mantissa LSB; 1 = no sharing
  std::string_view name;

  double effective_bits() const {
    const int b = base_format.total_bits();
    return k > 1 ? (b - 1) + 1.0 / k : b;
  }

  /// Bit-width with up to two decimals, repetends truncated: "4.33", "5.33".
  std::string bits_label() const {
    const int b = base_format.total_bits();
    if (k == 1) return std::to_string(b);
    const int hundredths = 100 / k;  // 50, 33, 25
    std::string frac = std::to_string(hundredths);
    if (frac.back() == '0') frac.pop_back();
    return std::to_string(b - 1) + "." + frac;
  }

  friend bool operator==(const QuantScheme& a, const QuantScheme& b) {
    return a.id == b.id;
  }
};

/// The eight shipped schemes, indexed by SchemeId.
inline std::span<const QuantScheme> all_schemes() {
  static const std::array<QuantScheme, 8> schemes = {{
      {SchemeId::fp4_e2m1, FloatFormat::from_name("e2m1"), 1, "fp4-e2m1"},
      {SchemeId::fp5_e2m2, FloatFormat::from_name("e2m2"), 1, "fp5-e2m2"},
      {SchemeId::fp6_e2m3, FloatFormat::from_name("e2m3"), 1, "fp6-e2m3"},
      {SchemeId::fp6_e3m2, FloatFormat::from_name("e3m2"), 1, "fp6-e3m2"},
      {SchemeId::fp4_25_e2m2, FloatFormat::from_name("e2m2"), 4,
       "fp4.25-e2m2"},
      {SchemeId::fp4_33_e2m2, FloatFormat::from_name("e2m2"), 3,
       "fp4.33-e2m2"},
      {SchemeId::fp4_5_e2m2, FloatFormat::from_name("e2m2"), 2, "fp4.5-e2m2"},
      {SchemeId::fp5_33_e2m3, FloatFormat::from_name("e2m3"), 3,
       "fp5.33-e2m3"},
  }};
  return schemes;
}

inline const QuantScheme& scheme_by_id(std::uint8_t id) {
  const auto schemes = all_schemes();
  if (id >= schemes.size()) {
    throw std::invalid_argument("unknown scheme id " + std::to_string(id));
  }
  return schemes[id];
}

inline const QuantScheme& scheme_by_name(std::string_view name) {
  for (const QuantScheme& s : all_schemes()) {
    if (s.name == name) return s;
  }
  throw std::invalid_argument("unknown scheme: " + std::string(name));
}

}  // namespace amsq
