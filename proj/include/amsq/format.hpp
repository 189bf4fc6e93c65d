// Copyright 2026 The amsq Authors
// SPDX-License-Identifier: Apache-2.0
//
// Parametric minifloat formats: decoding, value enumeration, round-to-nearest
// encoding and conversion of codes to binary16 bit patterns.
//
// A code is laid out [sign | exponent | mantissa] from most to least
// significant bit. The all-ones exponent is an ordinary value, so every code
// decodes to a finite real; there are no Inf/NaN encodings.

#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "amsq/half.hpp"

namespace amsq {

class FloatFormat {
 public:
  FloatFormat(int exp_bits, int man_bits, int bias)
      : exp_bits_(exp_bits), man_bits_(man_bits), bias_(bias) {
    if (exp_bits < 1 || exp_bits > 3 || man_bits < 0 || man_bits > 4 ||
        1 + exp_bits + man_bits > 8) {
      throw std::invalid_argument("FloatFormat: unsupported width");
    }
  }

  /// Format with the standard bias 2^(e-1) - 1.
  static FloatFormat with_standard_bias(int exp_bits, int man_bits) {
    return FloatFormat(exp_bits, man_bits, (1 << (exp_bits - 1)) - 1);
  }

  /// Presets addressable from the CLI: e2m1, e2m2, e2m3, e3m2.
  static FloatFormat from_name(std::string_view name) {
    if (name == "e2m1") return with_standard_bias(2, 1);
    if (name == "e2m2") return with_standard_bias(2, 2);
    if (name == "e2m3") return with_standard_bias(2, 3);
    if (name == "e3m2") return with_standard_bias(3, 2);
    throw std::invalid_argument("unknown format: " + std::string(name));
  }

  int exp_bits() const { return exp_bits_; }
  int man_bits() const { return man_bits_; }
  int bias() const { return bias_; }
  int total_bits() const { return 1 + exp_bits_ + man_bits_; }
  unsigned code_count() const { return 1u << total_bits(); }
  unsigned sign_mask() const { return 1u << (exp_bits_ + man_bits_); }

  std::string name() const {
    return "e" + std::to_string(exp_bits_) + "m" + std::to_string(man_bits_);
  }

  friend bool operator==(const FloatFormat&, const FloatFormat&) = default;

 private:
  int exp_bits_;
  int man_bits_;
  int bias_;
};

/// One representable value and its canonical code.
struct GridPoint {
  float value;
  std::uint8_t code;
};

/// Decodes a raw code to its exact value. Total over the code space; the
/// zero-exponent field selects the subnormal form (no implicit leading one).
inline float decode(unsigned code, const FloatFormat& fmt) {
  assert(code < fmt.code_count());
  const int m = fmt.man_bits();
  const unsigned exp = (code >> m) & ((1u << fmt.exp_bits()) - 1u);
  const unsigned man = code & ((1u << m) - 1u);
  const float sgn = (code & fmt.sign_mask()) ? -1.0f : 1.0f;
  if (exp == 0) {
    return sgn * std::ldexp(static_cast<float>(man), 1 - fmt.bias() - m);
  }
  return sgn * std::ldexp(static_cast<float>((1u << m) | man),
                          static_cast<int>(exp) - fmt.bias() - m);
}

namespace detail {

struct FormatKey {
  int e, m, bias;
  friend auto operator<=>(const FormatKey&, const FormatKey&) = default;
};

struct FormatTables {
  std::vector<float> value_of_code;      // indexed by raw code
  std::vector<GridPoint> sorted;         // strictly increasing, 2^(1+e+m)-1
  std::vector<std::uint16_t> half_bits;  // binary16 pattern per raw code
  float max_value = 0.0f;
};

inline FormatTables build_tables(const FloatFormat& fmt) {
  FormatTables t;
  const unsigned n = fmt.code_count();
  const unsigned half_n = n / 2;  // magnitudes per sign
  t.value_of_code.resize(n);
  t.half_bits.resize(n);
  for (unsigned c = 0; c < n; ++c) {
    t.value_of_code[c] = decode(c, fmt);
    t.half_bits[c] = float_to_half(t.value_of_code[c]);
  }
  // Non-negative codes in raw order decode to strictly increasing values, so
  // the sorted list is negatives reversed, the canonical +0, then positives.
  t.sorted.reserve(2 * half_n - 1);
  for (unsigned mag = half_n - 1; mag >= 1; --mag) {
    const unsigned c = fmt.sign_mask() | mag;
    t.sorted.push_back({t.value_of_code[c], static_cast<std::uint8_t>(c)});
  }
  t.sorted.push_back({0.0f, 0});
  for (unsigned mag = 1; mag < half_n; ++mag) {
    t.sorted.push_back({t.value_of_code[mag], static_cast<std::uint8_t>(mag)});
  }
  t.max_value = t.sorted.back().value;
  return t;
}

inline const FormatTables& tables_for(const FloatFormat& fmt) {
  static std::map<FormatKey, std::unique_ptr<const FormatTables>> cache;
  static std::shared_mutex mutex;
  const FormatKey key{fmt.exp_bits(), fmt.man_bits(), fmt.bias()};
  {
    std::shared_lock lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return *it->second;
  }
  std::unique_lock lock(mutex);
  auto& slot = cache[key];
  if (!slot) slot = std::make_unique<const FormatTables>(build_tables(fmt));
  return *slot;
}

}  // namespace detail

/// All representable values in strictly increasing order with their canonical
/// codes; -0 and +0 collapse to the single +0 entry.
inline std::span<const GridPoint> enumerate_values(const FloatFormat& fmt) {
  return detail::tables_for(fmt).sorted;
}

/// Largest representable magnitude (the M of s_q = max(|W|)/M).
inline float max_magnitude(const FloatFormat& fmt) {
  return detail::tables_for(fmt).max_value;
}

/// Nearest-value encoder over a grid obtained from enumerate_values().
/// Out-of-range inputs clamp to +-max. Exact midpoints round to the candidate
/// with even mantissa field (and toward the smaller magnitude when m == 0,
/// where both neighbors have an empty mantissa).
inline std::uint8_t round_to_nearest(float w, std::span<const GridPoint> grid) {
  assert(std::isfinite(w));
  if (!(w > grid.front().value)) return grid.front().code;
  if (w >= grid.back().value) return grid.back().code;
  const auto hi = std::lower_bound(
      grid.begin(), grid.end(), w,
      [](const GridPoint& g, float x) { return g.value < x; });
  const auto lo = hi - 1;
  // Both operands are exact floats, so the double distances are exact.
  const double dlo = static_cast<double>(w) - static_cast<double>(lo->value);
  const double dhi = static_cast<double>(hi->value) - static_cast<double>(w);
  if (dlo < dhi) return lo->code;
  if (dhi < dlo) return hi->code;
  if ((lo->code & 1u) == 0 && (hi->code & 1u) == 0) {
    return std::fabs(lo->value) <= std::fabs(hi->value) ? lo->code : hi->code;
  }
  return (lo->code & 1u) == 0 ? lo->code : hi->code;
}

inline std::uint8_t round_to_nearest(float w, const FloatFormat& fmt) {
  return round_to_nearest(w, enumerate_values(fmt));
}

/// Binary16 pattern decoding to exactly decode(code, fmt). Exact for every
/// format this library admits (all values are binary16 normals or zero).
inline std::uint16_t to_fp16_bits(unsigned code, const FloatFormat& fmt) {
  return detail::tables_for(fmt).half_bits[code];
}

/// Per-code binary16 patterns; entry c equals to_fp16_bits(c, fmt). This is
/// the normative restoration path the bit-op kernels are checked against.
inline std::span<const std::uint16_t> restore_table(const FloatFormat& fmt) {
  return detail::tables_for(fmt).half_bits;
}

/// Per-code decoded values (raw-code indexed companion of enumerate_values).
inline std::span<const float> decode_table(const FloatFormat& fmt) {
  return detail::tables_for(fmt).value_of_code;
}

}  // namespace amsq
