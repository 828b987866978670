// Copyright (c) 2026 hyface authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "hyface/core/error.hpp"

namespace hyface::dsp {

inline bool is_power_of_two(int64_t n) { return n > 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 Cooley-Tukey. Size must be a power of two.
inline void fft_inplace(std::vector<std::complex<double>>& a) {
  const size_t n = a.size();
  if (!is_power_of_two(static_cast<int64_t>(n)))
    fail(ErrorCode::ShapeMismatch, "dsp", "fft size must be a power of two");
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  // twiddles computed directly per index; a multiplicative recurrence would
  // drift a few ulp per stage and break agreement with the DFT-basis path
  std::vector<std::complex<double>> tw(n / 2);
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * 3.14159265358979323846 / static_cast<double>(len);
    for (size_t k = 0; k < len / 2; ++k)
      tw[k] = {std::cos(ang * static_cast<double>(k)),
               std::sin(ang * static_cast<double>(k))};
    for (size_t i = 0; i < n; i += len) {
      for (size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = a[i + k];
        std::complex<double> v = a[i + k + len / 2] * tw[k];
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }
}

// Real-input FFT returning the n/2+1 non-negative-frequency bins.
inline std::vector<std::complex<double>> rfft(const double* x, size_t len,
                                              size_t n) {
  std::vector<std::complex<double>> a(n, {0.0, 0.0});
  const size_t m = std::min(len, n);
  for (size_t i = 0; i < m; ++i) a[i] = {x[i], 0.0};
  fft_inplace(a);
  a.resize(n / 2 + 1);
  return a;
}

}  // namespace hyface::dsp
