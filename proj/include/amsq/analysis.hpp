// Copyright 2026 The amsq Authors
// SPDX-License-Identifier: Apache-2.0
//
// Quantization-error reporting: per-scheme MSE / max-abs-error rows, the
// adaptive-search gain against globally forced shared bits, and weight
// histograms for distribution plots.

#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "amsq/kernels.hpp"
#include "amsq/quantize.hpp"

namespace amsq {

struct ErrorRow {
  const QuantScheme* scheme = nullptr;
  double bits_per_weight = 0.0;
  double mse = 0.0;
  double max_abs_err = 0.0;
  std::size_t payload_bytes = 0;
};

/// Quantizes with each scheme, restores, and folds (restored - original)^2
/// over the logical elements in row-major order.
inline std::vector<ErrorRow> error_report(const Matrix& weights,
                                          std::span<const QuantScheme> schemes,
                                          int threads = 1) {
  std::vector<ErrorRow> rows;
  rows.reserve(schemes.size());
  for (const QuantScheme& scheme : schemes) {
    const QuantizedTensor qt = quantize_tensor(weights, scheme, threads);
    const Matrix restored = restore_matrix(qt, threads);
    double sum = 0.0;
    double max_abs = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      const double d = static_cast<double>(restored.data[i]) -
                       static_cast<double>(weights.data[i]);
      sum += d * d;
      max_abs = std::max(max_abs, std::fabs(d));
    }
    ErrorRow row;
    row.scheme = &scheme_by_id(static_cast<std::uint8_t>(scheme.id));
    row.bits_per_weight = scheme.effective_bits();
    row.mse = sum / static_cast<double>(weights.size());
    row.max_abs_err = max_abs;
    row.payload_bytes = qt.payload_bytes();
    rows.push_back(row);
  }
  return rows;
}

struct AmsGain {
  double adaptive_mse = 0.0;
  double forced0_mse = 0.0;
  double forced1_mse = 0.0;
};

/// Quantifies the adaptive search: squared error with the per-group best bit
/// versus forcing every shared bit to 0 or to 1. Sums are accumulated per
/// group in row-major group order, so adaptive_mse equals the sum over
/// groups of min(err0, err1) exactly, not just within rounding.
inline AmsGain ams_gain(const Matrix& weights, const FloatFormat& fmt, int k,
                        int threads = 1) {
  if (k < 2 || k > 4) throw std::invalid_argument("ams_gain: k must be 2..4");
  auto [codes, scales] = rtn_quantize(weights, fmt, threads);
  const std::span<const float> values = decode_table(fmt);
  const std::size_t gpr = (weights.cols + k - 1) / k;
  std::vector<double> adaptive(weights.rows, 0.0);
  std::vector<double> forced0(weights.rows, 0.0);
  std::vector<double> forced1(weights.rows, 0.0);
  parallel_for(weights.rows, threads, [&](std::size_t r0, std::size_t r1) {
    for (std::size_t r = r0; r < r1; ++r) {
      const float s = half_to_float(scales[r]);
      const float* w = weights.data.data() + r * weights.cols;
      const std::uint8_t* row = codes.codes.data() + r * weights.cols;
      for (std::size_t g = 0; g < gpr; ++g) {
        const std::size_t begin = g * static_cast<std::size_t>(k);
        const std::size_t end =
            std::min(begin + static_cast<std::size_t>(k), weights.cols);
        double err[2] = {0.0, 0.0};
        for (unsigned b = 0; b < 2; ++b) {
          for (std::size_t c = begin; c < end; ++c) {
            const float restored =
                values[detail::set_mantissa_lsb(row[c], b, fmt)] * s;
            const double d =
                static_cast<double>(restored) - static_cast<double>(w[c]);
            err[b] += d * d;
          }
        }
        adaptive[r] += std::min(err[0], err[1]);
        forced0[r] += err[0];
        forced1[r] += err[1];
      }
    }
  });
  AmsGain gain;
  double a = 0.0, f0 = 0.0, f1 = 0.0;
  for (std::size_t r = 0; r < weights.rows; ++r) {
    a += adaptive[r];
    f0 += forced0[r];
    f1 += forced1[r];
  }
  const double n = static_cast<double>(weights.size());
  gain.adaptive_mse = a / n;
  gain.forced0_mse = f0 / n;
  gain.forced1_mse = f1 / n;
  return gain;
}

struct Histogram {
  std::vector<double> edges;      // bins + 1
  std::vector<std::size_t> counts;  // bins
};

/// Equal-width histogram over [min, max]. A constant input lands entirely in
/// the first bin.
inline Histogram weight_histogram(std::span<const float> values,
                                  std::size_t bins) {
  if (values.empty()) throw std::invalid_argument("weight_histogram: empty");
  if (bins < 1) throw std::invalid_argument("weight_histogram: bins < 1");
  double lo = values[0], hi = values[0];
  for (float v : values) {
    lo = std::min(lo, static_cast<double>(v));
    hi = std::max(hi, static_cast<double>(v));
  }
  Histogram h;
  h.counts.assign(bins, 0);
  h.edges.resize(bins + 1);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i <= bins; ++i) {
    h.edges[i] = lo + width * static_cast<double>(i);
  }
  h.edges[bins] = hi;
  for (float v : values) {
    std::size_t idx = 0;
    if (width > 0.0) {
      idx = std::min(bins - 1, static_cast<std::size_t>(
                                   (static_cast<double>(v) - lo) / width));
    }
    ++h.counts[idx];
  }
  return h;
}

inline void write_error_csv(std::ostream& out,
                            std::span<const ErrorRow> rows) {
  const auto flags = out.flags();
  const auto precision = out.precision(10);
  out << "scheme,bits_per_weight,mse,max_abs_err,payload_bytes\n";
  for (const ErrorRow& r : rows) {
    out << r.scheme->name << ',' << r.scheme->bits_label() << ',' << r.mse
        << ',' << r.max_abs_err << ',' << r.payload_bytes << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

inline void write_histogram_csv(std::ostream& out, const Histogram& h) {
  const auto flags = out.flags();
  const auto precision = out.precision(10);
  out << "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    out << h.edges[i] << ',' << h.edges[i + 1] << ',' << h.counts[i] << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

}  // namespace amsq
