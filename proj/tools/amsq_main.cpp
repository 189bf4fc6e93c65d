// Copyright 2026 The amsq Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "amsq/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"amsq: minifloat weight quantization with shared mantissa LSBs"};
  app.require_subcommand(1);

  amsq::cli::QuantizeOptions quantize_opt;
  auto* quantize = app.add_subcommand(
      "quantize", "Quantize an NPY weight matrix into an AMSQ container");
  quantize->add_option("--input", quantize_opt.input, "input .npy (\"<f4\" or \"<f2\")")
      ->required();
  quantize->add_option("--output", quantize_opt.output, "output .amsq")
      ->required();
  quantize->add_option("--scheme", quantize_opt.scheme,
                       "scheme id (see `amsq formats`)");
  quantize->add_option("--threads", quantize_opt.threads, "0 = auto");

  amsq::cli::RestoreOptions restore_opt;
  auto* restore = app.add_subcommand(
      "restore", "Restore an AMSQ container to a dense NPY matrix");
  restore->add_option("--input", restore_opt.input, "input .amsq")->required();
  restore->add_option("--output", restore_opt.output, "output .npy")
      ->required();
  restore->add_option("--dtype", restore_opt.dtype, "f2 or f4 (default f2)");
  restore->add_option("--threads", restore_opt.threads, "0 = auto");

  amsq::cli::AnalyzeOptions analyze_opt;
  auto* analyze = app.add_subcommand(
      "analyze", "Per-scheme quantization error report (CSV)");
  analyze->add_option("--input", analyze_opt.input, "input .npy")->required();
  analyze->add_option("--schemes", analyze_opt.schemes,
                      "comma-separated scheme ids (default: all)")
      ->delimiter(',');
  analyze->add_option("--histogram", analyze_opt.histogram_bins,
                      "emit a weight histogram with this many bins instead");
  analyze->add_option("--output", analyze_opt.output,
                      "CSV destination (default: stdout)");
  analyze->add_option("--threads", analyze_opt.threads, "0 = auto");

  amsq::cli::BenchOptions bench_opt;
  auto* bench = app.add_subcommand(
      "bench", "GEMV micro-benchmark and weight-traffic report (JSON)");
  bench->add_option("--rows", bench_opt.rows, "output channels");
  bench->add_option("--cols", bench_opt.cols, "input channels");
  bench->add_option("--preset", bench_opt.preset,
                    "qwen3-4b | qwen2.5-7b | qwen3-32b");
  bench->add_option("--scheme", bench_opt.scheme, "scheme id");
  bench->add_option("--batches", bench_opt.batches, "batch sizes")
      ->delimiter(',');
  bench->add_option("--reps", bench_opt.reps, "timing repetitions");
  bench->add_option("--seed", bench_opt.seed, "data seed");
  bench->add_option("--threads", bench_opt.threads, "0 = auto");
  bench->add_flag("--verify", bench_opt.verify,
                  "check fused gemv against the reference before timing");
  bench->add_option("--output", bench_opt.output,
                    "JSON destination (default: stdout)");

  amsq::cli::FormatsOptions formats_opt;
  auto* formats =
      app.add_subcommand("formats", "List the shipped quantization schemes");
  formats->add_flag("--list", formats_opt.list_only, "ids only, one per line");

  CLI11_PARSE(app, argc, argv);

  if (quantize->parsed()) {
    return amsq::cli::run_quantize(quantize_opt, std::cout, std::cerr);
  }
  if (restore->parsed()) {
    return amsq::cli::run_restore(restore_opt, std::cout, std::cerr);
  }
  if (analyze->parsed()) {
    return amsq::cli::run_analyze(analyze_opt, std::cout, std::cerr);
  }
  if (bench->parsed()) {
    return amsq::cli::run_bench(bench_opt, std::cout, std::cerr);
  }
  if (formats->parsed()) {
    return amsq::cli::run_formats(formats_opt, std::cout, std::cerr);
  }
  return 2;
}
