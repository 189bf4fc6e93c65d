// Copyright 2026 The amsq Authors
// SPDX-License-Identifier: Apache-2.0
//
// Runtime restoration of packed weights to binary16 and the fused
// dequantize-GEMV path. Restoration has two interchangeable routes: the
// normative lookup through restore_table(), and a shift/and/or route that
// stitches code segments out of the words and rebias-converts them without
// any table. The two must agree on every code; tests check this exhaustively.

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cassert>
#include <chrono>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "amsq/half.hpp"
#include "amsq/packing.hpp"
#include "amsq/parallel.hpp"
#include "amsq/quantize.hpp"

namespace amsq {

/// Rebias conversion of a minifloat code to binary16 bits using only shifts,
/// masks and ors (plus a leading-bit scan for subnormal sources). Equals
/// to_fp16_bits(code, fmt) for every code.
inline std::uint16_t code_to_half_bitops(unsigned code, int exp_bits,
                                         int man_bits, int bias) {
  const unsigned exp_mask = (1u << exp_bits) - 1u;
  const unsigned man_mask = (1u << man_bits) - 1u;
  const unsigned sign = (code >> (exp_bits + man_bits)) & 1u;
  const unsigned exp = (code >> man_bits) & exp_mask;
  const unsigned man = code & man_mask;
  if (exp != 0) {
    return static_cast<std::uint16_t>(
        (sign << 15) | ((exp + 15u - static_cast<unsigned>(bias)) << 10) |
        (man << (10 - man_bits)));
  }
  if (man == 0) return static_cast<std::uint16_t>(sign << 15);
  const int lead = std::bit_width(man) - 1;
  const unsigned exp16 =
      static_cast<unsigned>(16 - bias + lead - man_bits);
  const unsigned man16 = (man ^ (1u << lead)) << (10 - lead);
  return static_cast<std::uint16_t>((sign << 15) | (exp16 << 10) | man16);
}

/// Table route: unpack the block, then look each code up. Normative.
inline void restore_block(std::span<const std::uint16_t> words,
                          const PackLayout& layout,
                          std::span<const std::uint16_t> table,
                          std::span<std::uint16_t> out) {
  std::uint8_t codes[64];
  assert(layout.block <= std::size(codes));  // largest shipped block
  unpack_block(words, layout, std::span<std::uint8_t>(codes, layout.block));
  for (std::size_t i = 0; i < layout.block; ++i) out[i] = table[codes[i]];
}

/// Bit-op route: stitch segments and shared LSBs back into codes, rebias
/// into binary16. No table involved.
inline void restore_block_bitops(std::span<const std::uint16_t> words,
                                 const PackLayout& layout,
                                 std::span<std::uint16_t> out) {
  const FloatFormat& fmt = layout.scheme->base_format;
  const int e = fmt.exp_bits(), m = fmt.man_bits(), bias = fmt.bias();
  for (std::size_t i = 0; i < layout.block; ++i) {
    unsigned code = 0;
    for (const PackSegment& seg : layout.segments_of(i)) {
      code |= ((words[seg.word] >> seg.bit) & ((1u << seg.width) - 1u))
              << seg.code_shift;
    }
    out[i] = code_to_half_bitops(code, e, m, bias);
  }
  if (!layout.shared.empty()) {
    const std::size_t k = static_cast<std::size_t>(layout.scheme->k);
    for (std::size_t g = 0; g < layout.shared.size(); ++g) {
      const SharedSlot& slot = layout.shared[g];
      if (((words[slot.word] >> slot.bit) & 1u) == 0) continue;
      for (std::size_t j = 0; j < k; ++j) {
        // Re-run with the LSB included; cheaper than predicting the carry.
        unsigned code = 1;
        for (const PackSegment& seg : layout.segments_of(g * k + j)) {
          code |= ((words[seg.word] >> seg.bit) & ((1u << seg.width) - 1u))
                  << seg.code_shift;
        }
        out[g * k + j] = code_to_half_bitops(code, e, m, bias);
      }
    }
  }
}

/// Restored weights as floats (binary16 grid value times binary16 scale,
/// multiplied in single precision), logical columns only.
inline Matrix restore_matrix(const QuantizedTensor& qt, int threads = 1) {
  const PackLayout& layout = layout_of(*qt.scheme);
  const auto table = restore_table(qt.scheme->base_format);
  Matrix out(qt.rows, qt.cols);
  parallel_for(qt.rows, threads, [&](std::size_t r0, std::size_t r1) {
    std::vector<std::uint16_t> buf(layout.block);
    for (std::size_t r = r0; r < r1; ++r) {
      const auto words = qt.row_words(r);
      const float s = half_to_float(qt.scales[r]);
      float* dst = out.data.data() + r * out.cols;
      for (std::size_t b = 0; b * layout.block < qt.padded_cols; ++b) {
        restore_block(words.subspan(b * layout.words_per_block,
                                    layout.words_per_block),
                      layout, table, buf);
        const std::size_t base = b * layout.block;
        const std::size_t n =
            std::min(layout.block, qt.cols > base ? qt.cols - base : 0);
        for (std::size_t j = 0; j < n; ++j) {
          dst[base + j] = half_to_float(buf[j]) * s;
        }
      }
    }
  });
  return out;
}

/// Restored weights rounded to binary16 (the dense-GEMV baseline operand).
inline std::vector<std::uint16_t> restore_matrix_half(
    const QuantizedTensor& qt, int threads = 1) {
  const Matrix m = restore_matrix(qt, threads);
  std::vector<std::uint16_t> out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = float_to_half(m.data[i]);
  return out;
}

namespace detail {

inline void check_gemv_shapes(const QuantizedTensor& qt,
                              std::span<const std::uint16_t> x,
                              std::size_t batch) {
  if (batch == 0 || x.size() != batch * qt.cols) {
    throw std::invalid_argument("gemv: activation shape mismatch");
  }
}

}  // namespace detail

/// Fused dequantize-GEMV: y[b][r] = fp16(sum_i fp32(w)*fp32(scale)*fp32(x)),
/// accumulated in single precision in ascending i. Each payload word is read
/// once per row regardless of batch size; the restored block feeds every
/// batch accumulator before the next block is touched.
inline std::vector<std::uint16_t> gemv(const QuantizedTensor& qt,
                                       std::span<const std::uint16_t> x,
                                       std::size_t batch, int threads = 1) {
  detail::check_gemv_shapes(qt, x, batch);
  const PackLayout& layout = layout_of(*qt.scheme);
  const auto table = restore_table(qt.scheme->base_format);
  std::vector<std::uint16_t> y(batch * qt.rows);
  parallel_for(qt.rows, threads, [&](std::size_t r0, std::size_t r1) {
    std::vector<std::uint16_t> wbuf(layout.block);
    std::vector<float> acc(batch);
    for (std::size_t r = r0; r < r1; ++r) {
      const auto words = qt.row_words(r);
      const float s = half_to_float(qt.scales[r]);
      std::fill(acc.begin(), acc.end(), 0.0f);
      for (std::size_t blk = 0; blk * layout.block < qt.padded_cols; ++blk) {
        restore_block(words.subspan(blk * layout.words_per_block,
                                    layout.words_per_block),
                      layout, table, wbuf);
        const std::size_t base = blk * layout.block;
        const std::size_t n =
            std::min(layout.block, qt.cols > base ? qt.cols - base : 0);
        for (std::size_t b = 0; b < batch; ++b) {
          const std::uint16_t* xb = x.data() + b * qt.cols + base;
          float a = acc[b];
          for (std::size_t j = 0; j < n; ++j) {
            a += (half_to_float(wbuf[j]) * s) * half_to_float(xb[j]);
          }
          acc[b] = a;
        }
      }
      for (std::size_t b = 0; b < batch; ++b) {
        y[b * qt.rows + r] = float_to_half(acc[b]);
      }
    }
  });
  return y;
}

/// Correctness oracle: unpack the whole tensor to binary16 first, then run
/// the identical ascending-order single-precision accumulation.
inline std::vector<std::uint16_t> gemv_reference(
    const QuantizedTensor& qt, std::span<const std::uint16_t> x,
    std::size_t batch, int threads = 1) {
  detail::check_gemv_shapes(qt, x, batch);
  const PackLayout& layout = layout_of(*qt.scheme);
  const auto table = restore_table(qt.scheme->base_format);
  std::vector<std::uint16_t> w16(qt.rows * qt.padded_cols);
  parallel_for(qt.rows, threads, [&](std::size_t r0, std::size_t r1) {
    for (std::size_t r = r0; r < r1; ++r) {
      const auto codes = unpack_row(qt.row_words(r), layout);
      for (std::size_t c = 0; c < qt.padded_cols; ++c) {
        w16[r * qt.padded_cols + c] = table[codes[c]];
      }
    }
  });
  std::vector<std::uint16_t> y(batch * qt.rows);
  parallel_for(qt.rows, threads, [&](std::size_t r0, std::size_t r1) {
    for (std::size_t r = r0; r < r1; ++r) {
      const float s = half_to_float(qt.scales[r]);
      const std::uint16_t* wr = w16.data() + r * qt.padded_cols;
      for (std::size_t b = 0; b < batch; ++b) {
        const std::uint16_t* xb = x.data() + b * qt.cols;
        float a = 0.0f;
        for (std::size_t i = 0; i < qt.cols; ++i) {
          a += (half_to_float(wr[i]) * s) * half_to_float(xb[i]);
        }
        y[b * qt.rows + r] = float_to_half(a);
      }
    }
  });
  return y;
}

/// Dense binary16 GEMV with the same accumulation order; the timing baseline.
inline std::vector<std::uint16_t> dense_gemv_fp16(
    std::span<const std::uint16_t> w, std::size_t rows, std::size_t cols,
    std::span<const std::uint16_t> x, std::size_t batch, int threads = 1) {
  if (w.size() != rows * cols || x.size() != batch * cols) {
    throw std::invalid_argument("dense_gemv_fp16: shape mismatch");
  }
  std::vector<std::uint16_t> y(batch * rows);
  parallel_for(rows, threads, [&](std::size_t r0, std::size_t r1) {
    for (std::size_t r = r0; r < r1; ++r) {
      const std::uint16_t* wr = w.data() + r * cols;
      for (std::size_t b = 0; b < batch; ++b) {
        const std::uint16_t* xb = x.data() + b * cols;
        float a = 0.0f;
        for (std::size_t i = 0; i < cols; ++i) {
          a += half_to_float(wr[i]) * half_to_float(xb[i]);
        }
        y[b * rows + r] = float_to_half(a);
      }
    }
  });
  return y;
}

struct BenchPreset {
  std::string_view name;
  std::size_t rows;
  std::size_t cols;
};

inline std::span<const BenchPreset> bench_presets() {
  static constexpr std::array<BenchPreset, 3> presets = {{
      {"qwen3-4b", 2560, 9728},
      {"qwen2.5-7b", 3584, 18944},
      {"qwen3-32b", 5120, 25600},
  }};
  return presets;
}

struct BenchConfig {
  std::size_t rows = 0;
  std::size_t cols = 0;
  const QuantScheme* scheme = nullptr;
  std::vector<std::size_t> batches = {1, 2, 4, 8, 16, 32};
  int reps = 5;
  std::uint64_t seed = 1;
  int threads = 1;
  bool verify = false;
};

struct BenchRow {
  std::size_t batch = 0;
  double median_ns = 0.0;
  double fp16_median_ns = 0.0;
};

struct BenchReport {
  const QuantScheme* scheme = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t padded_cols = 0;
  std::size_t payload_bytes = 0;
  std::size_t fp16_bytes = 0;
  double traffic_ratio = 0.0;  // fp16_bytes / payload_bytes
  bool verified = false;
  std::vector<BenchRow> rows_by_batch;
};

namespace detail {

inline Matrix gaussian_matrix(std::size_t rows, std::size_t cols,
                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> dist(0.0f, 1.0f);
  Matrix m(rows, cols);
  for (float& v : m.data) v = dist(rng);
  return m;
}

inline std::vector<std::uint16_t> gaussian_half(std::size_t n,
                                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> dist(0.0f, 1.0f);
  std::vector<std::uint16_t> v(n);
  for (auto& h : v) h = float_to_half(dist(rng));
  return v;
}

template <typename Fn>
double median_ns(int reps, Fn&& fn) {
  std::vector<double> t;
  t.reserve(reps);
  for (int i = 0; i < reps; ++i) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    const auto stop = std::chrono::steady_clock::now();
    t.push_back(std::chrono::duration<double, std::nano>(stop - start).count());
  }
  std::sort(t.begin(), t.end());
  const std::size_t n = t.size();
  return n % 2 ? t[n / 2] : 0.5 * (t[n / 2 - 1] + t[n / 2]);
}

}  // namespace detail

/// Times the fused GEMV against the dense binary16 baseline on synthetic
/// Gaussian data and reports the weight-traffic byte ratio. Wall-clock
/// numbers are informational; the byte ratio is the asserted quantity.
inline BenchReport bench(const BenchConfig& cfg) {
  if (cfg.rows == 0 || cfg.cols == 0 || cfg.scheme == nullptr) {
    throw std::invalid_argument("bench: rows, cols and scheme are required");
  }
  if (cfg.reps < 1) throw std::invalid_argument("bench: reps must be >= 1");
  const Matrix weights = detail::gaussian_matrix(cfg.rows, cfg.cols, cfg.seed);
  const QuantizedTensor qt = quantize_tensor(weights, *cfg.scheme, cfg.threads);
  const std::vector<std::uint16_t> dense = restore_matrix_half(qt, cfg.threads);

  BenchReport report;
  report.scheme = cfg.scheme;
  report.rows = cfg.rows;
  report.cols = cfg.cols;
  report.padded_cols = qt.padded_cols;
  report.payload_bytes = qt.payload_bytes();
  report.fp16_bytes = 2 * cfg.rows * cfg.cols;
  report.traffic_ratio = static_cast<double>(report.fp16_bytes) /
                         static_cast<double>(report.payload_bytes);
  report.verified = true;
  for (std::size_t batch : cfg.batches) {
    const auto x = detail::gaussian_half(batch * cfg.cols, cfg.seed ^ batch);
    if (cfg.verify) {
      report.verified = report.verified &&
                        gemv(qt, x, batch, cfg.threads) ==
                            gemv_reference(qt, x, batch, cfg.threads);
    }
    BenchRow row;
    row.batch = batch;
    row.median_ns = detail::median_ns(
        cfg.reps, [&] { gemv(qt, x, batch, cfg.threads); });
    row.fp16_median_ns = detail::median_ns(cfg.reps, [&] {
      dense_gemv_fp16(dense, cfg.rows, cfg.cols, x, batch, cfg.threads);
    });
    report.rows_by_batch.push_back(row);
  }
  if (!cfg.verify) report.verified = false;
  return report;
}

}  // namespace amsq
