// Copyright 2026 The amsq Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace amsq {

/// Dense row-major float matrix. Rows are output channels, columns input
/// channels throughout this library.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0f) {}
  Matrix(std::size_t r, std::size_t c, std::vector<float> d)
      : rows(r), cols(c), data(std::move(d)) {
    if (data.size() != rows * cols) {
      throw std::invalid_argument("Matrix: data size does not match shape");
    }
  }

  float& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  float at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<const float> row(std::size_t r) const {
    return std::span<const float>(data).subspan(r * cols, cols);
  }
  std::span<float> row(std::size_t r) {
    return std::span<float>(data).subspan(r * cols, cols);
  }

  std::size_t size() const { return rows * cols; }
};

inline std::size_t round_up(std::size_t n, std::size_t multiple) {
  return (n + multiple - 1) / multiple * multiple;
}

/// Copy with columns zero-padded to the next multiple.
inline Matrix pad_cols_to(const Matrix& m, std::size_t multiple) {
  const std::size_t padded = round_up(m.cols, multiple);
  if (padded == m.cols) return m;
  Matrix out(m.rows, padded);
  for (std::size_t r = 0; r < m.rows; ++r) {
    const auto src = m.row(r);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

}  // namespace amsq
