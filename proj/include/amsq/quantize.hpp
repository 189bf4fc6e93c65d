// Copyright 2026 The amsq Authors
// SPDX-License-Identifier: Apache-2.0
//
// Channel-wise round-to-nearest quantization (one scale per output-channel
// row, s_q = max(|W|)/M) and adaptive mantissa sharing: groups of k codes
// along the input-channel axis share one mantissa LSB, chosen per group to
// minimize the squared error of the restored values against the originals.

#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "amsq/format.hpp"
#include "amsq/matrix.hpp"
#include "amsq/packing.hpp"
#include "amsq/parallel.hpp"
#include "amsq/scheme.hpp"

namespace amsq {

/// Codes for a rows x cols matrix, plus the per-group shared bits once
/// ams_share has run. cols may exceed logical_cols when the matrix was
/// padded for packing; padding columns always hold the +0 code.
struct CodeMatrix {
  FloatFormat fmt;
  int k = 1;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t logical_cols = 0;
  std::vector<std::uint8_t> codes;        // rows * cols, row-major
  std::vector<std::uint8_t> shared_bits;  // rows * groups_per_row, k > 1 only

  std::size_t groups_per_row() const { return (cols + k - 1) / k; }
  std::span<const std::uint8_t> row(std::size_t r) const {
    return std::span<const std::uint8_t>(codes).subspan(r * cols, cols);
  }
};

/// Packed weights: payload words row after row, one binary16 scale per row.
struct QuantizedTensor {
  const QuantScheme* scheme = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;         // logical columns
  std::size_t padded_cols = 0;  // block multiple actually packed
  std::vector<std::uint16_t> scales;   // binary16 bits
  std::vector<std::uint16_t> payload;  // little-endian words on disk

  std::size_t words_per_row() const {
    return rows == 0 ? 0 : payload.size() / rows;
  }
  std::size_t payload_bytes() const { return payload.size() * 2; }
  std::span<const std::uint16_t> row_words(std::size_t r) const {
    const std::size_t wpr = words_per_row();
    return std::span<const std::uint16_t>(payload).subspan(r * wpr, wpr);
  }
};

/// Packed payload size in bytes for a given shape, by the layout formula.
inline std::size_t packed_payload_bytes(const QuantScheme& scheme,
                                        std::size_t rows, std::size_t cols) {
  const PackLayout& layout = layout_of(scheme);
  const std::size_t padded = round_up(cols, layout.block);
  return rows * packed_words_per_row(layout, padded) * 2;
}

/// Eq. s_q = max(|row|)/M; an all-zero row degenerates to scale 1.
inline float channel_scale(std::span<const float> row,
                           const FloatFormat& fmt) {
  if (row.empty()) throw std::invalid_argument("channel_scale: empty row");
  float max_abs = 0.0f;
  for (float v : row) {
    if (!std::isfinite(v)) throw std::runtime_error("non-finite weight");
    max_abs = std::max(max_abs, std::fabs(v));
  }
  if (max_abs == 0.0f) return 1.0f;
  return max_abs / max_magnitude(fmt);
}

/// Scale as stored: rounded to binary16, clamped away from zero so it stays
/// positive, rejected if it overflows half range.
inline std::uint16_t stored_scale_bits(float scale) {
  std::uint16_t h = static_cast<std::uint16_t>(float_to_half(scale) & 0x7FFF);
  if (h >= 0x7C00) {
    throw std::runtime_error("channel scale overflows half precision");
  }
  if (h == 0) h = 1;  // smallest half subnormal
  return h;
}

namespace detail {

/// Sets the mantissa LSB and keeps zero canonical: the -0 pattern (which can
/// only arise from clearing the LSB of the smallest negative subnormal)
/// collapses to +0 so that restored tensors re-quantize to identical bytes.
inline std::uint8_t set_mantissa_lsb(std::uint8_t code, unsigned bit,
                                     const FloatFormat& fmt) {
  std::uint8_t c = static_cast<std::uint8_t>((code & ~1u) | bit);
  if (c == fmt.sign_mask()) c = 0;
  return c;
}

}  // namespace detail

/// Round-to-nearest quantization with one scale per row. Codes are produced
/// by dividing through the binary16-rounded stored scale, so requantizing a
/// restored tensor reproduces the codes exactly.
inline std::pair<CodeMatrix, std::vector<std::uint16_t>> rtn_quantize(
    const Matrix& weights, const FloatFormat& fmt, int threads = 1) {
  CodeMatrix cm{fmt, 1, weights.rows, weights.cols, weights.cols,
                std::vector<std::uint8_t>(weights.rows * weights.cols), {}};
  std::vector<std::uint16_t> scales(weights.rows);
  const std::span<const GridPoint> grid = enumerate_values(fmt);
  parallel_for(weights.rows, threads, [&](std::size_t r0, std::size_t r1) {
    for (std::size_t r = r0; r < r1; ++r) {
      const auto row = weights.row(r);
      const std::uint16_t s16 = stored_scale_bits(channel_scale(row, fmt));
      scales[r] = s16;
      const float s = half_to_float(s16);
      std::uint8_t* out = cm.codes.data() + r * cm.cols;
      for (std::size_t c = 0; c < row.size(); ++c) {
        out[c] = round_to_nearest(row[c] / s, grid);
      }
    }
  });
  return {std::move(cm), std::move(scales)};
}

/// Adaptive mantissa sharing over groups of k consecutive columns. For each
/// group both candidate bits are scored by the squared error of the restored
/// values against the original weights; ties pick bit 0. Groups that reach
/// into padding (columns at or beyond logical_cols) are pinned to bit 0 so
/// padding keeps restoring to exactly zero.
inline CodeMatrix ams_share(const CodeMatrix& codes, const Matrix& original,
                            std::span<const std::uint16_t> scales, int k,
                            int threads = 1) {
  if (k < 2 || k > 4) throw std::invalid_argument("ams_share: k must be 2..4");
  if (codes.k != 1) throw std::invalid_argument("ams_share: expected k=1 codes");
  if (original.rows != codes.rows || original.cols != codes.cols ||
      scales.size() != codes.rows) {
    throw std::invalid_argument("ams_share: shape mismatch");
  }
  CodeMatrix out = codes;
  out.k = k;
  const std::size_t gpr = out.groups_per_row();
  out.shared_bits.assign(out.rows * gpr, 0);
  const std::span<const float> values = decode_table(codes.fmt);
  const FloatFormat fmt = codes.fmt;
  parallel_for(out.rows, threads, [&](std::size_t r0, std::size_t r1) {
    for (std::size_t r = r0; r < r1; ++r) {
      const float s = half_to_float(scales[r]);
      const float* w = original.data.data() + r * original.cols;
      std::uint8_t* row = out.codes.data() + r * out.cols;
      for (std::size_t g = 0; g < gpr; ++g) {
        const std::size_t begin = g * static_cast<std::size_t>(k);
        const std::size_t end =
            std::min(begin + static_cast<std::size_t>(k), out.cols);
        unsigned bit = 0;
        if (end <= out.logical_cols) {
          double err[2] = {0.0, 0.0};
          for (unsigned b = 0; b < 2; ++b) {
            for (std::size_t c = begin; c < end; ++c) {
              const float restored =
                  values[detail::set_mantissa_lsb(row[c], b, fmt)] * s;
              const double d = static_cast<double>(restored) -
                               static_cast<double>(w[c]);
              err[b] += d * d;
            }
          }
          bit = err[1] < err[0] ? 1u : 0u;
        }
        for (std::size_t c = begin; c < end; ++c) {
          row[c] = detail::set_mantissa_lsb(row[c], bit, fmt);
        }
        out.shared_bits[r * gpr + g] = static_cast<std::uint8_t>(bit);
      }
    }
  });
  return out;
}

/// Full pipeline: pad columns to the packing block, round-to-nearest
/// quantize, share mantissa LSBs when the scheme asks for it, pack.
inline QuantizedTensor quantize_tensor(const Matrix& weights,
                                       const QuantScheme& scheme,
                                       int threads = 1) {
  if (weights.rows == 0 || weights.cols == 0) {
    throw std::invalid_argument("quantize_tensor: empty matrix");
  }
  const PackLayout& layout = layout_of(scheme);
  const Matrix padded = pad_cols_to(weights, layout.block);
  auto [codes, scales] = rtn_quantize(padded, scheme.base_format, threads);
  codes.logical_cols = weights.cols;
  if (scheme.k > 1) {
    codes = ams_share(codes, padded, scales, scheme.k, threads);
  }
  QuantizedTensor qt;
  qt.scheme = &scheme_by_id(static_cast<std::uint8_t>(scheme.id));
  qt.rows = weights.rows;
  qt.cols = weights.cols;
  qt.padded_cols = padded.cols;
  qt.scales = std::move(scales);
  const std::size_t wpr = packed_words_per_row(layout, padded.cols);
  qt.payload.assign(qt.rows * wpr, 0);
  parallel_for(qt.rows, threads, [&](std::size_t r0, std::size_t r1) {
    for (std::size_t r = r0; r < r1; ++r) {
      pack_row(codes.row(r), layout,
               std::span<std::uint16_t>(qt.payload).subspan(r * wpr, wpr));
    }
  });
  return qt;
}

}  // namespace amsq
