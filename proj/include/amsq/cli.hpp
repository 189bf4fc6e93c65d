// Copyright 2026 The amsq Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command handlers behind the amsq binary. Machine-readable JSON/CSV goes to
// the output stream, diagnostics to the error stream; the return value is
// the process exit status (0 success, 1 runtime failure, 2 usage error).

#pragma once

#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "amsq/analysis.hpp"
#include "amsq/container.hpp"
#include "amsq/kernels.hpp"
#include "amsq/npy.hpp"
#include "amsq/quantize.hpp"

namespace amsq::cli {

namespace detail {

inline double bits_as_number(const QuantScheme& s) {
  return std::stod(s.bits_label());
}

/// Writes to the named file, or to fallback when the name is empty.
template <typename Fn>
void with_output(const std::string& path, std::ostream& fallback, Fn&& fn) {
  if (path.empty()) {
    fn(fallback);
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  fn(out);
}

}  // namespace detail

struct QuantizeOptions {
  std::string input;
  std::string output;
  std::string scheme = "fp4.25-e2m2";
  int threads = 1;
};

struct RestoreOptions {
  std::string input;
  std::string output;
  std::string dtype = "f2";
  int threads = 1;
};

struct AnalyzeOptions {
  std::string input;
  std::string output;  // empty: stdout
  std::vector<std::string> schemes;  // empty: all
  std::size_t histogram_bins = 0;  // > 0: emit a weight histogram instead
  int threads = 1;
};

struct BenchOptions {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::string preset;
  std::string scheme = "fp5.33-e2m3";
  std::vector<std::size_t> batches = {1, 2, 4, 8, 16, 32};
  int reps = 5;
  std::uint64_t seed = 1;
  int threads = 1;
  bool verify = false;
  std::string output;
};

struct FormatsOptions {
  bool list_only = false;
};

inline int run_quantize(const QuantizeOptions& opt, std::ostream& out,
                        std::ostream& err) {
  try {
    const QuantScheme& scheme = scheme_by_name(opt.scheme);
    const Matrix weights = read_npy(opt.input);
    const int threads = resolve_threads(opt.threads);
    const QuantizedTensor qt = quantize_tensor(weights, scheme, threads);
    save_amsq(opt.output, qt);
    const Matrix restored = restore_matrix(qt, threads);
    double sum = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      const double d = static_cast<double>(restored.data[i]) -
                       static_cast<double>(weights.data[i]);
      sum += d * d;
    }
    nlohmann::json summary = {
        {"rows", qt.rows},
        {"cols", qt.cols},
        {"bits_per_weight", detail::bits_as_number(scheme)},
        {"payload_bytes", qt.payload_bytes()},
        {"mse", sum / static_cast<double>(weights.size())},
    };
    out << summary.dump() << '\n';
    return 0;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

inline int run_restore(const RestoreOptions& opt, std::ostream& out,
                       std::ostream& err) {
  try {
    if (opt.dtype != "f2" && opt.dtype != "f4") {
      throw std::invalid_argument("dtype must be f2 or f4");
    }
    const QuantizedTensor qt = load_amsq(opt.input);
    const int threads = resolve_threads(opt.threads);
    const Matrix restored = restore_matrix(qt, threads);
    if (opt.dtype == "f4") {
      write_npy(opt.output, restored);
    } else {
      std::vector<std::uint16_t> halves(restored.size());
      for (std::size_t i = 0; i < restored.size(); ++i) {
        halves[i] = float_to_half(restored.data[i]);
      }
      write_npy_half(opt.output, halves, restored.rows, restored.cols);
    }
    nlohmann::json summary = {{"rows", qt.rows},
                              {"cols", qt.cols},
                              {"scheme", std::string(qt.scheme->name)},
                              {"dtype", opt.dtype}};
    out << summary.dump() << '\n';
    return 0;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

inline int run_analyze(const AnalyzeOptions& opt, std::ostream& out,
                       std::ostream& err) {
  try {
    const Matrix weights = read_npy(opt.input);
    if (opt.histogram_bins > 0) {
      const Histogram h = weight_histogram(weights.data, opt.histogram_bins);
      detail::with_output(opt.output, out,
                          [&](std::ostream& o) { write_histogram_csv(o, h); });
      return 0;
    }
    std::vector<QuantScheme> schemes;
    if (opt.schemes.empty()) {
      schemes.assign(all_schemes().begin(), all_schemes().end());
    } else {
      for (const std::string& name : opt.schemes) {
        schemes.push_back(scheme_by_name(name));
      }
    }
    const auto rows =
        error_report(weights, schemes, resolve_threads(opt.threads));
    detail::with_output(opt.output, out,
                        [&](std::ostream& o) { write_error_csv(o, rows); });
    return 0;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

inline int run_bench(const BenchOptions& opt, std::ostream& out,
                     std::ostream& err) {
  try {
    BenchConfig cfg;
    cfg.rows = opt.rows;
    cfg.cols = opt.cols;
    if (!opt.preset.empty()) {
      bool found = false;
      for (const BenchPreset& p : bench_presets()) {
        if (p.name == opt.preset) {
          cfg.rows = p.rows;
          cfg.cols = p.cols;
          found = true;
          break;
        }
      }
      if (!found) throw std::invalid_argument("unknown preset " + opt.preset);
    }
    cfg.scheme = &scheme_by_name(opt.scheme);
    cfg.batches = opt.batches;
    cfg.reps = opt.reps;
    cfg.seed = opt.seed;
    cfg.threads = resolve_threads(opt.threads);
    cfg.verify = opt.verify;
    const BenchReport report = bench(cfg);

    nlohmann::json rows = nlohmann::json::array();
    for (const BenchRow& row : report.rows_by_batch) {
      rows.push_back({
          {"scheme", std::string(report.scheme->name)},
          {"rows", report.rows},
          {"cols", report.cols},
          {"padded_cols", report.padded_cols},
          {"batch", row.batch},
          {"median_ns", row.median_ns},
          {"fp16_median_ns", row.fp16_median_ns},
          {"payload_bytes", report.payload_bytes},
          {"fp16_bytes", report.fp16_bytes},
          {"traffic_ratio", report.traffic_ratio},
      });
    }
    if (opt.verify) {
      if (!report.verified) throw std::runtime_error("gemv verify failed");
      err << "verify: fused gemv matches reference bitwise\n";
    }
    detail::with_output(opt.output, out,
                        [&](std::ostream& o) { o << rows.dump() << '\n'; });
    return 0;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

inline int run_formats(const FormatsOptions& opt, std::ostream& out,
                       std::ostream& err) {
  try {
    if (opt.list_only) {
      for (const QuantScheme& s : all_schemes()) out << s.name << '\n';
      return 0;
    }
    out << "scheme,base_format,k,bits_per_weight,block,words_per_block,"
           "max_value\n";
    for (const QuantScheme& s : all_schemes()) {
      const PackLayout& layout = layout_of(s);
      out << s.name << ',' << s.base_format.name() << ',' << s.k << ','
          << s.bits_label() << ',' << layout.block << ','
          << layout.words_per_block << ',' << max_magnitude(s.base_format)
          << '\n';
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace amsq::cli
