// Copyright (c) 2026 hyface authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstdint>
#include <vector>

namespace hyface {

/// Dense row-major matrix of doubles. The plain data carrier used by the DSP
/// front-end and feature cache; the learnable path has its own tensor type.
struct Matrix {
  int64_t rows = 0;
  int64_t cols = 0;
  std::vector<double> v;

  Matrix() = default;
  Matrix(int64_t r, int64_t c, double fill = 0.0)
      : rows(r), cols(c), v(static_cast<size_t>(r * c), fill) {}

  double& at(int64_t r, int64_t c) { return v[static_cast<size_t>(r * cols + c)]; }
  double at(int64_t r, int64_t c) const {
    return v[static_cast<size_t>(r * cols + c)];
  }
  const double* row(int64_t r) const { return v.data() + r * cols; }
  double* row(int64_t r) { return v.data() + r * cols; }
  int64_t size() const { return rows * cols; }
  bool empty() const { return v.empty(); }
};

}  // namespace hyface
