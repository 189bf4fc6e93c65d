// Copyright 2026 The amsq Authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
// the exit status is the number of failed criteria. Failure details go to
// stderr.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "amsq/amsq.hpp"
#include "amsq/cli.hpp"
#include "test_oracles.hpp"

namespace {

using amsq::FloatFormat;
using amsq::Matrix;

struct Check {
  bool ok = true;
  std::ostringstream detail;

  template <typename A, typename B>
  void expect_eq(const A& a, const B& b, const char* what) {
    if (!(a == b)) {
      ok = false;
      detail << "  mismatch: " << what << " (" << a << " vs " << b << ")\n";
    }
  }
  void expect(bool cond, const char* what) {
    if (!cond) {
      ok = false;
      detail << "  failed: " << what << "\n";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

struct FormatCorners {
  const char* name;
  float max_normal, min_normal, max_subnormal, min_subnormal;
};

// 1. Format fidelity: the e2m3/e3m2 corner values, exactly, in under 1 s.
bool criterion_format_fidelity(std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  Check c;
  const FormatCorners corners[] = {
      {"e2m3", 7.5f, 1.0f, 0.875f, 0.125f},
      {"e3m2", 28.0f, 0.25f, 0.1875f, 0.0625f},
  };
  for (const auto& want : corners) {
    const auto fmt = FloatFormat::from_name(want.name);
    const auto grid = amsq::enumerate_values(fmt);
    c.expect_eq(grid.size(), fmt.code_count() - 1, "enumeration size");
    float min_normal = 0, max_subnormal = 0, min_subnormal = 0;
    for (const auto& g : grid) {
      if (g.value <= 0) continue;
      const unsigned exp_field =
          (g.code >> fmt.man_bits()) & ((1u << fmt.exp_bits()) - 1u);
      if (exp_field != 0) {
        if (min_normal == 0) min_normal = g.value;
      } else {
        if (min_subnormal == 0) min_subnormal = g.value;
        if (g.value > max_subnormal) max_subnormal = g.value;
      }
    }
    c.expect_eq(grid.back().value, want.max_normal, "max normal");
    c.expect_eq(min_normal, want.min_normal, "min normal");
    c.expect_eq(max_subnormal, want.max_subnormal, "max subnormal");
    c.expect_eq(min_subnormal, want.min_subnormal, "min subnormal");
  }
  const double elapsed = seconds_since(start);
  c.expect(elapsed < 1.0, "runtime under 1 s");
  if (!c.ok) err << c.detail.str();
  return c.ok;
}

// 2. round_to_nearest equals the brute-force argmin on 1e5 random inputs per
// format, ties included, in under 10 s.
bool criterion_rtn_oracle(std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  Check c;
  std::mt19937_64 rng(101);
  for (const char* name : {"e2m1", "e2m2", "e2m3", "e3m2"}) {
    const auto fmt = FloatFormat::from_name(name);
    const float m = amsq::max_magnitude(fmt);
    std::uniform_real_distribution<float> dist(-2.0f * m, 2.0f * m);
    for (int i = 0; i < 100000; ++i) {
      const float w = dist(rng);
      if (amsq::round_to_nearest(w, fmt) !=
          amsq_test::oracle_round_to_nearest(w, fmt)) {
        c.ok = false;
        c.detail << "  rtn mismatch " << name << " w=" << w << "\n";
        break;
      }
    }
    for (float mid : amsq_test::grid_midpoints(fmt)) {
      if (amsq::round_to_nearest(mid, fmt) !=
          amsq_test::oracle_round_to_nearest(mid, fmt)) {
        c.ok = false;
        c.detail << "  tie mismatch " << name << " w=" << mid << "\n";
      }
    }
  }
  const double elapsed = seconds_since(start);
  c.expect(elapsed < 10.0, "runtime under 10 s");
  if (!c.ok) err << c.detail.str();
  return c.ok;
}

// 3. unpack(pack(x)) == x for 1e4 random rows per scheme in under 30 s.
bool criterion_pack_bijection(std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  Check c;
  std::mt19937_64 rng(103);
  for (const auto& scheme : amsq::all_schemes()) {
    const auto& layout = amsq::layout_of(scheme);
    const unsigned codes_n = scheme.base_format.code_count();
    std::uniform_int_distribution<unsigned> dist(0, codes_n - 1);
    for (int iter = 0; iter < 10000; ++iter) {
      const std::size_t blocks = 1 + (rng() & 3);
      std::vector<std::uint8_t> codes(blocks * layout.block);
      for (auto& x : codes) x = static_cast<std::uint8_t>(dist(rng));
      if (scheme.k > 1) {
        const std::size_t k = static_cast<std::size_t>(scheme.k);
        for (std::size_t g = 0; g < codes.size() / k; ++g) {
          const unsigned bit = rng() & 1u;
          for (std::size_t j = 0; j < k; ++j) {
            codes[g * k + j] =
                static_cast<std::uint8_t>((codes[g * k + j] & ~1u) | bit);
          }
        }
      }
      if (amsq::unpack_row(amsq::pack_row(codes, layout), layout) != codes) {
        c.ok = false;
        c.detail << "  bijection broken for " << scheme.name << "\n";
        break;
      }
    }
  }
  const double elapsed = seconds_since(start);
  c.expect(elapsed < 30.0, "runtime under 30 s");
  if (!c.ok) err << c.detail.str();
  return c.ok;
}

// 4. Bit-op restoration equals the table path for every code of every scheme.
bool criterion_restore_equivalence(std::ostream& err) {
  Check c;
  for (const auto& scheme : amsq::all_schemes()) {
    const auto& layout = amsq::layout_of(scheme);
    const auto table = amsq::restore_table(scheme.base_format);
    for (unsigned code = 0; code < scheme.base_format.code_count(); ++code) {
      const std::vector<std::uint8_t> codes(layout.block,
                                            static_cast<std::uint8_t>(code));
      const auto words = amsq::pack_row(codes, layout);
      std::vector<std::uint16_t> via_table(layout.block);
      std::vector<std::uint16_t> via_bitops(layout.block);
      amsq::restore_block(words, layout, table, via_table);
      amsq::restore_block_bitops(words, layout, via_bitops);
      if (via_table != via_bitops ||
          via_table[0] != amsq::to_fp16_bits(code, scheme.base_format)) {
        c.ok = false;
        c.detail << "  restore mismatch " << scheme.name << " code " << code
                 << "\n";
      }
    }
  }
  if (!c.ok) err << c.detail.str();
  return c.ok;
}

// 5. On 20 Gaussian 128x384 matrices per shared scheme, the restored squared
// error equals the sum of per-group minima exactly and never exceeds the
// globally forced alternatives.
bool criterion_adaptive_optimality(std::ostream& err) {
  Check c;
  for (const char* name :
       {"fp4.5-e2m2", "fp4.33-e2m2", "fp4.25-e2m2", "fp5.33-e2m3"}) {
    const auto& scheme = amsq::scheme_by_name(name);
    const auto fmt = scheme.base_format;
    const int k = scheme.k;
    for (std::uint64_t seed = 1; seed <= 20 && c.ok; ++seed) {
      const Matrix w = amsq_test::gaussian(128, 384, seed * 7919);
      auto [rtn, scales] = amsq::rtn_quantize(w, fmt, 2);
      const auto shared = amsq::ams_share(rtn, w, scales, k, 2);
      double total = 0.0, total_min = 0.0, forced0 = 0.0, forced1 = 0.0;
      for (std::size_t r = 0; r < w.rows; ++r) {
        const float s = amsq::half_to_float(scales[r]);
        for (std::size_t g = 0; g * k < w.cols; ++g) {
          double err_b[2] = {0.0, 0.0};
          double err_got = 0.0;
          for (std::size_t col = g * k;
               col < std::min<std::size_t>((g + 1) * k, w.cols); ++col) {
            const std::uint8_t rc = rtn.codes[r * w.cols + col];
            for (unsigned b = 0; b < 2; ++b) {
              std::uint8_t cand = static_cast<std::uint8_t>((rc & ~1u) | b);
              if (cand == fmt.sign_mask()) cand = 0;
              const double d =
                  static_cast<double>(amsq::decode(cand, fmt) * s) -
                  static_cast<double>(w.at(r, col));
              err_b[b] += d * d;
            }
            const double d =
                static_cast<double>(
                    amsq::decode(shared.codes[r * w.cols + col], fmt) * s) -
                static_cast<double>(w.at(r, col));
            err_got += d * d;
          }
          if (err_got != std::min(err_b[0], err_b[1])) {
            c.ok = false;
            c.detail << "  group error is not the candidate minimum ("
                     << name << ", seed " << seed << ")\n";
          }
          total += err_got;
          total_min += std::min(err_b[0], err_b[1]);
          forced0 += err_b[0];
          forced1 += err_b[1];
        }
      }
      c.expect(total == total_min, "total equals sum of group minima");
      c.expect(total <= forced0, "adaptive beats forced-0");
      c.expect(total <= forced1, "adaptive beats forced-1");
    }
  }
  if (!c.ok) err << c.detail.str();
  return c.ok;
}

// 6. Fused gemv is bitwise equal to the unpacked reference for every scheme,
// shape, batch size and seed in the grid.
bool criterion_gemv_oracle(std::ostream& err) {
  Check c;
  const std::pair<std::size_t, std::size_t> shapes[] = {{64, 192}, {128, 512}};
  for (const auto& scheme : amsq::all_schemes()) {
    for (const auto& [rows, cols] : shapes) {
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto qt = amsq::quantize_tensor(
            amsq_test::gaussian(rows, cols, seed * 104729), scheme, 2);
        for (std::size_t batch : {1, 2, 4, 8, 16, 32}) {
          const auto x =
              amsq_test::gaussian_half(batch * cols, seed * 31 + batch);
          if (amsq::gemv(qt, x, batch, 2) !=
              amsq::gemv_reference(qt, x, batch, 2)) {
            c.ok = false;
            c.detail << "  gemv mismatch " << scheme.name << " " << rows
                     << "x" << cols << " batch " << batch << " seed " << seed
                     << "\n";
          }
        }
      }
    }
  }
  if (!c.ok) err << c.detail.str();
  return c.ok;
}

// 7. Weight-traffic byte ratios at the (5120, 25600) bench shape: exactly
// 16/4.25 for fp4.25 and 3.000 +- 0.001 for fp5.33 (25600 pads to 25602).
// Wall-clock speedups are hardware-specific and reported informationally by
// `amsq bench`; only the byte ratios are asserted.
bool criterion_compression_ratios(std::ostream& err) {
  Check c;
  const double fp16_bytes = 2.0 * 5120 * 25600;
  const auto& fp425 = amsq::scheme_by_name("fp4.25-e2m2");
  const auto& fp533 = amsq::scheme_by_name("fp5.33-e2m3");
  const double ratio425 =
      fp16_bytes /
      static_cast<double>(amsq::packed_payload_bytes(fp425, 5120, 25600));
  const double ratio533 =
      fp16_bytes /
      static_cast<double>(amsq::packed_payload_bytes(fp533, 5120, 25600));
  c.expect(ratio425 == 16.0 / 4.25, "fp4.25 ratio equals 16/4.25 exactly");
  c.expect(std::fabs(ratio533 - 3.0) <= 0.001, "fp5.33 ratio within 3 +- 0.001");
  c.expect_eq(amsq::round_up(25600, amsq::layout_of(fp533).block), 25602ul,
              "fp5.33 padding 25600 -> 25602");
  // The size formula is the same code path a bench report uses; check it
  // against a materialized tensor and a real (small) bench run.
  const auto qt = amsq::quantize_tensor(amsq_test::gaussian(64, 192, 1), fp533);
  c.expect_eq(qt.payload_bytes(), amsq::packed_payload_bytes(fp533, 64, 192),
              "formula matches materialized payload");
  amsq::BenchConfig cfg;
  cfg.rows = 64;
  cfg.cols = 192;
  cfg.scheme = &fp533;
  cfg.batches = {1, 4};
  cfg.reps = 1;
  cfg.threads = 2;
  cfg.verify = true;
  const auto report = amsq::bench(cfg);
  c.expect(report.verified, "bench gemv verification");
  c.expect(report.traffic_ratio == 3.0, "bench reports the exact byte ratio");
  if (!c.ok) err << c.detail.str();
  return c.ok;
}

// 8. Mean-squared-error ordering across bit-widths on Gaussian weights, per
// seed: fp6-e2m3 <= fp5.33-e2m3 and fp5-e2m2 <= fp4.25-e2m2 <= fp4-e2m1.
bool criterion_mse_trend(std::ostream& err) {
  Check c;
  const std::vector<amsq::QuantScheme> schemes = {
      amsq::scheme_by_name("fp6-e2m3"), amsq::scheme_by_name("fp5.33-e2m3"),
      amsq::scheme_by_name("fp5-e2m2"), amsq::scheme_by_name("fp4.25-e2m2"),
      amsq::scheme_by_name("fp4-e2m1")};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Matrix w = amsq_test::gaussian(512, 512, seed * 131071);
    const auto rows = amsq::error_report(w, schemes, 2);
    const double e2m3_full = rows[0].mse, e2m3_shared = rows[1].mse;
    const double e2m2_full = rows[2].mse, e2m2_shared = rows[3].mse;
    const double e2m1_full = rows[4].mse;
    c.expect(e2m3_full <= e2m3_shared, "fp6-e2m3 <= fp5.33-e2m3");
    c.expect(e2m2_full <= e2m2_shared, "fp5-e2m2 <= fp4.25-e2m2");
    c.expect(e2m2_shared <= e2m1_full, "fp4.25-e2m2 <= fp4-e2m1");
    if (!c.ok) {
      c.detail << "  seed " << seed << ": " << e2m3_full << " "
               << e2m3_shared << " " << e2m2_full << " " << e2m2_shared << " "
               << e2m1_full << "\n";
      break;
    }
  }
  if (!c.ok) err << c.detail.str();
  return c.ok;
}

// 9. quantize -> restore -> quantize returns byte-identical containers, for
// every scheme, through the CLI handlers.
//
// Known limitation, reported rather than hidden: for the shared schemes
// (k > 1) this criterion conflicts with criterion 5. The
// adaptive search must take the per-group error minimum, and on generic
// data that sometimes clears the LSB of a row's max-magnitude code
// (demoting e.g. 7.0 to 6.0). Requantizing then re-derives the channel
// scale from the demoted maximum, so the scale bytes differ. Byte identity
// would require every row to keep an element at +-M, which contradicts the
// exact per-group minimum. The k = 1 schemes satisfy the criterion.
bool criterion_container_roundtrip(std::ostream& err) {
  namespace fs = std::filesystem;
  Check c;
  const fs::path dir =
      fs::temp_directory_path() /
      ("amsq_acceptance_" +
       std::to_string(
           std::chrono::steady_clock::now().time_since_epoch().count()));
  fs::create_directories(dir);
  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  std::ostringstream ignored;
  int shared_failures = 0;
  for (const auto& scheme : amsq::all_schemes()) {
    // 29 columns exercise both block padding and sub-k tail groups.
    amsq::write_npy((dir / "w.npy").string(),
                    amsq_test::gaussian(7, 29, 0xA5A5));
    const std::string first = (dir / "a.amsq").string();
    const std::string mid = (dir / "r.npy").string();
    const std::string second = (dir / "b.amsq").string();
    bool ok =
        amsq::cli::run_quantize({.input = (dir / "w.npy").string(),
                                 .output = first,
                                 .scheme = std::string(scheme.name)},
                                ignored, err) == 0;
    ok = ok && amsq::cli::run_restore(
                   {.input = first, .output = mid, .dtype = "f4"}, ignored,
                   err) == 0;
    ok = ok && amsq::cli::run_quantize({.input = mid,
                                        .output = second,
                                        .scheme = std::string(scheme.name)},
                                       ignored, err) == 0;
    if (!ok || slurp(first) != slurp(second)) {
      c.ok = false;
      shared_failures += scheme.k > 1 ? 1 : 0;
      c.detail << "  roundtrip not byte-identical for " << scheme.name
               << (scheme.k > 1 ? " (shared scheme)" : "") << "\n";
    }
  }
  fs::remove_all(dir);
  if (!c.ok) {
    err << c.detail.str();
    if (shared_failures > 0) {
      err << "  note: for k>1 schemes this criterion contradicts the exact\n"
             "  per-group minimum of criterion 5: the adaptive search may\n"
             "  demote a row's max-magnitude code, and the requantize scale\n"
             "  (max|restored|/M) then differs from the stored scale. The\n"
             "  fixpoint holds whenever every row keeps an element at +-M,\n"
             "  and always for k=1.\n";
    }
  }
  return c.ok;
}

struct Criterion {
  const char* name;
  bool (*run)(std::ostream&);
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {"format fidelity (e2m3/e3m2 corner values, < 1 s)",
       criterion_format_fidelity},
      {"round-to-nearest equals brute-force argmin (1e5/format, < 10 s)",
       criterion_rtn_oracle},
      {"pack/unpack bijection (1e4 rows/scheme, < 30 s)",
       criterion_pack_bijection},
      {"bit-op restoration equals table path (exhaustive)",
       criterion_restore_equivalence},
      {"adaptive search achieves per-group minimum (20x 128x384/scheme)",
       criterion_adaptive_optimality},
      {"fused gemv bitwise equals reference (all schemes/batches/seeds)",
       criterion_gemv_oracle},
      {"compression byte ratios at (5120, 25600)",
       criterion_compression_ratios},
      {"MSE ordering across bit-widths (5 seeds, 512x512)",
       criterion_mse_trend},
      {"container quantize->restore->quantize fixpoint",
       criterion_container_roundtrip},
  };
  int failures = 0;
  int index = 0;
  for (const Criterion& criterion : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    const bool ok = criterion.run(std::cerr);
    const double elapsed = seconds_since(start);
    std::printf("[%s] criterion %d: %s (%.2fs)\n", ok ? "PASS" : "FAIL",
                index, criterion.name, elapsed);
    std::fflush(stdout);
    failures += ok ? 0 : 1;
  }
  return failures;
}
