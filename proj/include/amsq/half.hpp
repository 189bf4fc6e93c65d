// Copyright 2026 The amsq Authors
// SPDX-License-Identifier: Apache-2.0
//
// IEEE-754 binary16 <-> binary32 conversions. Narrowing rounds to nearest
// even; widening is exact.

#pragma once

#include <bit>
#include <cstdint>

namespace amsq {

inline constexpr std::uint16_t kHalfOne = 0x3C00;

constexpr std::uint16_t float_bits_to_half(std::uint32_t fbits) {
  const std::uint32_t sign = (fbits >> 16) & 0x8000u;
  const std::uint32_t exp_field = (fbits >> 23) & 0xFFu;
  std::uint32_t man = fbits & 0x7FFFFFu;

  if (exp_field == 0xFFu) {
    std::uint32_t payload = man >> 13;
    if (man != 0 && payload == 0) payload = 1;  // keep NaNs NaN
    return static_cast<std::uint16_t>(sign | 0x7C00u | payload);
  }

  const std::int32_t exp = static_cast<std::int32_t>(exp_field) - 127 + 15;
  if (exp >= 31) return static_cast<std::uint16_t>(sign | 0x7C00u);
  if (exp <= 0) {
    if (exp < -10) return static_cast<std::uint16_t>(sign);
    // subnormal half: shift out 14-exp mantissa bits, round to nearest even
    man |= 0x800000u;
    const std::uint32_t shift = static_cast<std::uint32_t>(14 - exp);
    const std::uint32_t half_man = man >> shift;
    const std::uint32_t rem = man & ((1u << shift) - 1u);
    const std::uint32_t halfway = 1u << (shift - 1);
    std::uint32_t out = sign | half_man;
    if (rem > halfway || (rem == halfway && (half_man & 1u))) ++out;
    return static_cast<std::uint16_t>(out);
  }

  std::uint32_t out = sign | (static_cast<std::uint32_t>(exp) << 10) | (man >> 13);
  const std::uint32_t rem = man & 0x1FFFu;
  // the rounding carry may propagate into the exponent (65520.0f -> inf)
  if (rem > 0x1000u || (rem == 0x1000u && (out & 1u))) ++out;
  return static_cast<std::uint16_t>(out);
}

constexpr std::uint32_t half_bits_to_float_bits(std::uint16_t h) {
  const std::uint32_t sign = static_cast<std::uint32_t>(h & 0x8000u) << 16;
  const std::uint32_t exp = (h >> 10) & 0x1Fu;
  const std::uint32_t man = h & 0x3FFu;
  if (exp == 0) {
    if (man == 0) return sign;
    // normalize the subnormal: value is man * 2^-24
    const int lead = std::bit_width(man) - 1;
    const std::uint32_t e32 = static_cast<std::uint32_t>(103 + lead);
    const std::uint32_t m32 = (man ^ (1u << lead)) << (23 - lead);
    return sign | (e32 << 23) | m32;
  }
  if (exp == 31) return sign | 0x7F800000u | (man << 13);
  return sign | ((exp + 112u) << 23) | (man << 13);
}

inline std::uint16_t float_to_half(float f) {
  return float_bits_to_half(std::bit_cast<std::uint32_t>(f));
}

inline float half_to_float(std::uint16_t h) {
  return std::bit_cast<float>(half_bits_to_float_bits(h));
}

}  // namespace amsq
