// Copyright (c) 2026 hyface authors
// Licensed under the Apache License, Version 2.0
//
// Operator library for the autodiff engine. Sequences are [frames x channels]
// row-major; convolutions run im2col + GEMM (Eigen) in both directions.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "hyface/ag/tensor.hpp"

namespace hyface::ag {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

// ---------------------------------------------------------------------------
// elementwise

namespace detail {

template <typename F, typename DF>
Tensor unary(const Tensor& x, F f, DF df) {
  std::vector<double> v(x.data().size());
  for (size_t i = 0; i < v.size(); ++i) v[i] = f(x.data()[i]);
  auto px = x.n;
  return op_result(x.shape(), std::move(v), {x}, [px, df](Node& self) {
    if (!px->requires_grad) return;
    px->ensure_grad();
    for (size_t i = 0; i < self.val.size(); ++i)
      px->grad[i] += self.grad[i] * df(px->val[i], self.val[i]);
  });
}

}  // namespace detail

inline Tensor neg(const Tensor& x) {
  return detail::unary(x, [](double v) { return -v; },
                       [](double, double) { return -1.0; });
}
inline Tensor exp_t(const Tensor& x) {
  return detail::unary(x, [](double v) { return std::exp(v); },
                       [](double, double y) { return y; });
}
inline Tensor log_t(const Tensor& x) {
  return detail::unary(x, [](double v) { return std::log(v); },
                       [](double v, double) { return 1.0 / v; });
}
inline Tensor tanh_t(const Tensor& x) {
  return detail::unary(x, [](double v) { return std::tanh(v); },
                       [](double, double y) { return 1.0 - y * y; });
}
inline Tensor sigmoid_t(const Tensor& x) {
  return detail::unary(x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); },
                       [](double, double y) { return y * (1.0 - y); });
}
inline Tensor softplus_t(const Tensor& x) {
  return detail::unary(
      x,
      [](double v) { return v > 30.0 ? v : std::log1p(std::exp(v)); },
      [](double v, double) { return 1.0 / (1.0 + std::exp(-v)); });
}
inline Tensor relu(const Tensor& x) {
  return detail::unary(x, [](double v) { return v > 0.0 ? v : 0.0; },
                       [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}
inline Tensor leaky_relu(const Tensor& x, double slope = 0.1) {
  return detail::unary(
      x, [slope](double v) { return v > 0.0 ? v : slope * v; },
      [slope](double v, double) { return v > 0.0 ? 1.0 : slope; });
}
inline Tensor gelu(const Tensor& x) {
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  constexpr double inv_sqrt2pi = 0.39894228040143267794;
  return detail::unary(
      x,
      [=](double v) { return 0.5 * v * (1.0 + std::erf(v * inv_sqrt2)); },
      [=](double v, double) {
        return 0.5 * (1.0 + std::erf(v * inv_sqrt2)) +
               v * inv_sqrt2pi * std::exp(-0.5 * v * v);
      });
}
inline Tensor abs_t(const Tensor& x) {
  return detail::unary(x, [](double v) { return std::abs(v); },
                       [](double v, double) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}
inline Tensor square(const Tensor& x) {
  return detail::unary(x, [](double v) { return v * v; },
                       [](double v, double) { return 2.0 * v; });
}
inline Tensor sqrt_eps(const Tensor& x, double eps = 1e-12) {
  return detail::unary(x, [eps](double v) { return std::sqrt(v + eps); },
                       [](double, double y) { return 0.5 / y; });
}
inline Tensor clamp(const Tensor& x, double lo, double hi) {
  return detail::unary(
      x, [lo, hi](double v) { return std::min(std::max(v, lo), hi); },
      [lo, hi](double v, double) { return (v >= lo && v <= hi) ? 1.0 : 0.0; });
}
inline Tensor clamp_min(const Tensor& x, double lo) {
  return detail::unary(x, [lo](double v) { return std::max(v, lo); },
                       [lo](double v, double) { return v >= lo ? 1.0 : 0.0; });
}
inline Tensor add_scalar(const Tensor& x, double c) {
  return detail::unary(x, [c](double v) { return v + c; },
                       [](double, double) { return 1.0; });
}
inline Tensor mul_scalar(const Tensor& x, double c) {
  return detail::unary(x, [c](double v) { return v * c; },
                       [c](double, double) { return c; });
}

// ---------------------------------------------------------------------------
// binary (same shape)

namespace detail {

inline void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  require(a.shape() == b.shape(), ErrorCode::ShapeMismatch, "ag",
          std::string(op) + ": shape mismatch");
}

}  // namespace detail

inline Tensor add(const Tensor& a, const Tensor& b) {
  detail::check_same_shape(a, b, "add");
  std::vector<double> v(a.data());
  for (size_t i = 0; i < v.size(); ++i) v[i] += b.data()[i];
  auto pa = a.n, pb = b.n;
  return op_result(a.shape(), std::move(v), {a, b}, [pa, pb](Node& self) {
    if (pa->requires_grad) {
      pa->ensure_grad();
      for (size_t i = 0; i < self.grad.size(); ++i) pa->grad[i] += self.grad[i];
    }
    if (pb->requires_grad) {
      pb->ensure_grad();
      for (size_t i = 0; i < self.grad.size(); ++i) pb->grad[i] += self.grad[i];
    }
  });
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
  detail::check_same_shape(a, b, "sub");
  std::vector<double> v(a.data());
  for (size_t i = 0; i < v.size(); ++i) v[i] -= b.data()[i];
  auto pa = a.n, pb = b.n;
  return op_result(a.shape(), std::move(v), {a, b}, [pa, pb](Node& self) {
    if (pa->requires_grad) {
      pa->ensure_grad();
      for (size_t i = 0; i < self.grad.size(); ++i) pa->grad[i] += self.grad[i];
    }
    if (pb->requires_grad) {
      pb->ensure_grad();
      for (size_t i = 0; i < self.grad.size(); ++i) pb->grad[i] -= self.grad[i];
    }
  });
}

inline Tensor mul(const Tensor& a, const Tensor& b) {
  detail::check_same_shape(a, b, "mul");
  std::vector<double> v(a.data());
  for (size_t i = 0; i < v.size(); ++i) v[i] *= b.data()[i];
  auto pa = a.n, pb = b.n;
  return op_result(a.shape(), std::move(v), {a, b}, [pa, pb](Node& self) {
    if (pa->requires_grad) {
      pa->ensure_grad();
      for (size_t i = 0; i < self.grad.size(); ++i)
        pa->grad[i] += self.grad[i] * pb->val[i];
    }
    if (pb->requires_grad) {
      pb->ensure_grad();
      for (size_t i = 0; i < self.grad.size(); ++i)
        pb->grad[i] += self.grad[i] * pa->val[i];
    }
  });
}

// m [R x C] + v (shape [C] or [1 x C]) broadcast over rows
inline Tensor add_rows(const Tensor& m, const Tensor& v) {
  const int64_t R = m.rows(), C = m.cols();
  require(v.numel() == C, ErrorCode::ShapeMismatch, "ag", "add_rows: bad vector");
  std::vector<double> out(m.data());
  for (int64_t r = 0; r < R; ++r)
    for (int64_t c = 0; c < C; ++c) out[r * C + c] += v.data()[c];
  auto pm = m.n, pv = v.n;
  return op_result(m.shape(), std::move(out), {m, v}, [pm, pv, R, C](Node& self) {
    if (pm->requires_grad) {
      pm->ensure_grad();
      for (size_t i = 0; i < self.grad.size(); ++i) pm->grad[i] += self.grad[i];
    }
    if (pv->requires_grad) {
      pv->ensure_grad();
      for (int64_t r = 0; r < R; ++r)
        for (int64_t c = 0; c < C; ++c) pv->grad[c] += self.grad[r * C + c];
    }
  });
}

// m [R x C] * v[C] broadcast over rows (v is a constant or parameter)
inline Tensor mul_rows(const Tensor& m, const Tensor& v) {
  const int64_t R = m.rows(), C = m.cols();
  require(v.numel() == C, ErrorCode::ShapeMismatch, "ag", "mul_rows: bad vector");
  std::vector<double> out(m.data());
  for (int64_t r = 0; r < R; ++r)
    for (int64_t c = 0; c < C; ++c) out[r * C + c] *= v.data()[c];
  auto pm = m.n, pv = v.n;
  return op_result(m.shape(), std::move(out), {m, v}, [pm, pv, R, C](Node& self) {
    if (pm->requires_grad) {
      pm->ensure_grad();
      for (int64_t r = 0; r < R; ++r)
        for (int64_t c = 0; c < C; ++c)
          pm->grad[r * C + c] += self.grad[r * C + c] * pv->val[c];
    }
    if (pv->requires_grad) {
      pv->ensure_grad();
      for (int64_t r = 0; r < R; ++r)
        for (int64_t c = 0; c < C; ++c)
          pv->grad[c] += self.grad[r * C + c] * pm->val[r * C + c];
    }
  });
}

// ---------------------------------------------------------------------------
// linear algebra

inline Tensor matmul(const Tensor& a, const Tensor& b) {
  require(a.rank() == 2 && b.rank() == 2 && a.cols() == b.rows(),
          ErrorCode::ShapeMismatch, "ag", "matmul: incompatible shapes");
  const int64_t R = a.rows(), K = a.cols(), C = b.cols();
  std::vector<double> out(static_cast<size_t>(R * C));
  {
    ConstMap A(a.data().data(), R, K), B(b.data().data(), K, C);
    MutMap(out.data(), R, C).noalias() = A * B;
  }
  auto pa = a.n, pb = b.n;
  return op_result({static_cast<int>(R), static_cast<int>(C)}, std::move(out),
                   {a, b}, [pa, pb, R, K, C](Node& self) {
                     ConstMap G(self.grad.data(), R, C);
                     if (pa->requires_grad) {
                       pa->ensure_grad();
                       MutMap GA(pa->grad.data(), R, K);
                       ConstMap B(pb->val.data(), K, C);
                       GA.noalias() += G * B.transpose();
                     }
                     if (pb->requires_grad) {
                       pb->ensure_grad();
                       MutMap GB(pb->grad.data(), K, C);
                       ConstMap A(pa->val.data(), R, K);
                       GB.noalias() += A.transpose() * G;
                     }
                   });
}

inline Tensor transpose(const Tensor& x) {
  require(x.rank() == 2, ErrorCode::ShapeMismatch, "ag", "transpose: rank 2 only");
  const int64_t R = x.rows(), C = x.cols();
  std::vector<double> out(static_cast<size_t>(R * C));
  for (int64_t r = 0; r < R; ++r)
    for (int64_t c = 0; c < C; ++c) out[c * R + r] = x.data()[r * C + c];
  auto px = x.n;
  return op_result({static_cast<int>(C), static_cast<int>(R)}, std::move(out),
                   {x}, [px, R, C](Node& self) {
                     if (!px->requires_grad) return;
                     px->ensure_grad();
                     for (int64_t r = 0; r < R; ++r)
                       for (int64_t c = 0; c < C; ++c)
                         px->grad[r * C + c] += self.grad[c * R + r];
                   });
}

// ---------------------------------------------------------------------------
// shape ops

inline Tensor reshape(const Tensor& x, std::vector<int> shape) {
  int64_t n = 1;
  for (int d : shape) n *= d;
  require(n == x.numel(), ErrorCode::ShapeMismatch, "ag", "reshape: numel changed");
  auto px = x.n;
  return op_result(std::move(shape), x.data(), {x}, [px](Node& self) {
    if (!px->requires_grad) return;
    px->ensure_grad();
    for (size_t i = 0; i < self.grad.size(); ++i) px->grad[i] += self.grad[i];
  });
}

inline Tensor slice_cols(const Tensor& x, int c0, int c1) {
  require(x.rank() == 2 && 0 <= c0 && c0 < c1 && c1 <= x.cols(),
          ErrorCode::ShapeMismatch, "ag", "slice_cols: bad range");
  const int64_t R = x.rows(), C = x.cols(), W = c1 - c0;
  std::vector<double> out(static_cast<size_t>(R * W));
  for (int64_t r = 0; r < R; ++r)
    for (int64_t c = 0; c < W; ++c) out[r * W + c] = x.data()[r * C + c0 + c];
  auto px = x.n;
  return op_result({static_cast<int>(R), static_cast<int>(W)}, std::move(out),
                   {x}, [px, R, C, W, c0](Node& self) {
                     if (!px->requires_grad) return;
                     px->ensure_grad();
                     for (int64_t r = 0; r < R; ++r)
                       for (int64_t c = 0; c < W; ++c)
                         px->grad[r * C + c0 + c] += self.grad[r * W + c];
                   });
}

inline Tensor slice_rows(const Tensor& x, int r0, int r1) {
  require(x.rank() == 2 && 0 <= r0 && r0 < r1 && r1 <= x.rows(),
          ErrorCode::ShapeMismatch, "ag", "slice_rows: bad range");
  const int64_t C = x.cols(), H = r1 - r0;
  std::vector<double> out(x.data().begin() + r0 * C, x.data().begin() + r1 * C);
  auto px = x.n;
  return op_result({static_cast<int>(H), static_cast<int>(C)}, std::move(out),
                   {x}, [px, C, H, r0](Node& self) {
                     if (!px->requires_grad) return;
                     px->ensure_grad();
                     for (int64_t i = 0; i < H * C; ++i)
                       px->grad[r0 * C + i] += self.grad[i];
                   });
}

inline Tensor concat_cols(const Tensor& a, const Tensor& b) {
  require(a.rank() == 2 && b.rank() == 2 && a.rows() == b.rows(),
          ErrorCode::ShapeMismatch, "ag", "concat_cols: row mismatch");
  const int64_t R = a.rows(), Ca = a.cols(), Cb = b.cols(), C = Ca + Cb;
  std::vector<double> out(static_cast<size_t>(R * C));
  for (int64_t r = 0; r < R; ++r) {
    std::copy_n(a.data().data() + r * Ca, Ca, out.data() + r * C);
    std::copy_n(b.data().data() + r * Cb, Cb, out.data() + r * C + Ca);
  }
  auto pa = a.n, pb = b.n;
  return op_result({static_cast<int>(R), static_cast<int>(C)}, std::move(out),
                   {a, b}, [pa, pb, R, Ca, Cb, C](Node& self) {
                     if (pa->requires_grad) {
                       pa->ensure_grad();
                       for (int64_t r = 0; r < R; ++r)
                         for (int64_t c = 0; c < Ca; ++c)
                           pa->grad[r * Ca + c] += self.grad[r * C + c];
                     }
                     if (pb->requires_grad) {
                       pb->ensure_grad();
                       for (int64_t r = 0; r < R; ++r)
                         for (int64_t c = 0; c < Cb; ++c)
                           pb->grad[r * Cb + c] += self.grad[r * C + Ca + c];
                     }
                   });
}

inline Tensor concat_rows(const Tensor& a, const Tensor& b) {
  require(a.rank() == 2 && b.rank() == 2 && a.cols() == b.cols(),
          ErrorCode::ShapeMismatch, "ag", "concat_rows: col mismatch");
  const int64_t Ra = a.rows(), Rb = b.rows(), C = a.cols();
  std::vector<double> out;
  out.reserve(static_cast<size_t>((Ra + Rb) * C));
  out.insert(out.end(), a.data().begin(), a.data().end());
  out.insert(out.end(), b.data().begin(), b.data().end());
  auto pa = a.n, pb = b.n;
  return op_result({static_cast<int>(Ra + Rb), static_cast<int>(C)},
                   std::move(out), {a, b}, [pa, pb, Ra, Rb, C](Node& self) {
                     if (pa->requires_grad) {
                       pa->ensure_grad();
                       for (int64_t i = 0; i < Ra * C; ++i)
                         pa->grad[i] += self.grad[i];
                     }
                     if (pb->requires_grad) {
                       pb->ensure_grad();
                       for (int64_t i = 0; i < Rb * C; ++i)
                         pb->grad[i] += self.grad[Ra * C + i];
                     }
                   });
}

inline Tensor reverse_cols(const Tensor& x) {
  const int64_t R = x.rows(), C = x.cols();
  std::vector<double> out(static_cast<size_t>(R * C));
  for (int64_t r = 0; r < R; ++r)
    for (int64_t c = 0; c < C; ++c) out[r * C + c] = x.data()[r * C + (C - 1 - c)];
  auto px = x.n;
  return op_result(x.shape(), std::move(out), {x}, [px, R, C](Node& self) {
    if (!px->requires_grad) return;
    px->ensure_grad();
    for (int64_t r = 0; r < R; ++r)
      for (int64_t c = 0; c < C; ++c)
        px->grad[r * C + (C - 1 - c)] += self.grad[r * C + c];
  });
}

// ---------------------------------------------------------------------------
// reductions

inline Tensor sum_all(const Tensor& x) {
  double s = 0.0;
  for (double v : x.data()) s += v;
  auto px = x.n;
  return op_result({1}, {s}, {x}, [px](Node& self) {
    if (!px->requires_grad) return;
    px->ensure_grad();
    for (auto& g : px->grad) g += self.grad[0];
  });
}

inline Tensor mean_all(const Tensor& x) {
  const double inv = 1.0 / static_cast<double>(x.numel());
  double s = 0.0;
  for (double v : x.data()) s += v;
  auto px = x.n;
  return op_result({1}, {s * inv}, {x}, [px, inv](Node& self) {
    if (!px->requires_grad) return;
    px->ensure_grad();
    for (auto& g : px->grad) g += self.grad[0] * inv;
  });
}

// ---------------------------------------------------------------------------
// row-wise softmax / layer norm

inline Tensor softmax_rows(const Tensor& x) {
  const int64_t R = x.rows(), C = x.cols();
  std::vector<double> out(static_cast<size_t>(R * C));
  for (int64_t r = 0; r < R; ++r) {
    const double* src = x.data().data() + r * C;
    double* dst = out.data() + r * C;
    double mx = *std::max_element(src, src + C);
    double denom = 0.0;
    for (int64_t c = 0; c < C; ++c) {
      dst[c] = std::exp(src[c] - mx);
      denom += dst[c];
    }
    for (int64_t c = 0; c < C; ++c) dst[c] /= denom;
  }
  auto px = x.n;
  return op_result(x.shape(), std::move(out), {x}, [px, R, C](Node& self) {
    if (!px->requires_grad) return;
    px->ensure_grad();
    for (int64_t r = 0; r < R; ++r) {
      const double* y = self.val.data() + r * C;
      const double* gy = self.grad.data() + r * C;
      double dot = 0.0;
      for (int64_t c = 0; c < C; ++c) dot += gy[c] * y[c];
      double* gx = px->grad.data() + r * C;
      for (int64_t c = 0; c < C; ++c) gx[c] += y[c] * (gy[c] - dot);
    }
  });
}

inline Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                         double eps = 1e-5) {
  const int64_t R = x.rows(), C = x.cols();
  require(gamma.numel() == C && beta.numel() == C, ErrorCode::ShapeMismatch,
          "ag", "layer_norm: bad affine shape");
  std::vector<double> out(static_cast<size_t>(R * C));
  auto xhat = std::make_shared<std::vector<double>>(static_cast<size_t>(R * C));
  auto inv_std = std::make_shared<std::vector<double>>(R);
  for (int64_t r = 0; r < R; ++r) {
    const double* src = x.data().data() + r * C;
    double mu = 0.0;
    for (int64_t c = 0; c < C; ++c) mu += src[c];
    mu /= C;
    double var = 0.0;
    for (int64_t c = 0; c < C; ++c) var += (src[c] - mu) * (src[c] - mu);
    var /= C;
    const double istd = 1.0 / std::sqrt(var + eps);
    (*inv_std)[r] = istd;
    for (int64_t c = 0; c < C; ++c) {
      const double xh = (src[c] - mu) * istd;
      (*xhat)[r * C + c] = xh;
      out[r * C + c] = xh * gamma.data()[c] + beta.data()[c];
    }
  }
  auto px = x.n, pg = gamma.n, pb = beta.n;
  return op_result(
      x.shape(), std::move(out), {x, gamma, beta},
      [px, pg, pb, xhat, inv_std, R, C](Node& self) {
        for (int64_t r = 0; r < R; ++r) {
          const double* gy = self.grad.data() + r * C;
          const double* xh = xhat->data() + r * C;
          if (pg->requires_grad) {
            pg->ensure_grad();
            for (int64_t c = 0; c < C; ++c) pg->grad[c] += gy[c] * xh[c];
          }
          if (pb->requires_grad) {
            pb->ensure_grad();
            for (int64_t c = 0; c < C; ++c) pb->grad[c] += gy[c];
          }
          if (px->requires_grad) {
            px->ensure_grad();
            const double istd = (*inv_std)[r];
            double sum_g = 0.0, sum_gx = 0.0;
            for (int64_t c = 0; c < C; ++c) {
              const double dxh = gy[c] * pg->val[c];
              sum_g += dxh;
              sum_gx += dxh * xh[c];
            }
            double* gx = px->grad.data() + r * C;
            for (int64_t c = 0; c < C; ++c) {
              const double dxh = gy[c] * pg->val[c];
              gx[c] += istd * (dxh - sum_g / C - xh[c] * sum_gx / C);
            }
          }
        }
      });
}

// Relative-position bias: logits[i,j] += bias[clip(j-i+R, 0, 2R), head].
inline Tensor add_rel_bias(const Tensor& logits, const Tensor& bias, int head,
                           int max_rel) {
  const int64_t T = logits.rows();
  require(logits.cols() == T, ErrorCode::ShapeMismatch, "ag",
          "add_rel_bias: square logits expected");
  const int64_t V = bias.rows(), H = bias.cols();
  require(V == 2 * max_rel + 1 && head < H, ErrorCode::ShapeMismatch, "ag",
          "add_rel_bias: bad bias table");
  std::vector<double> out(logits.data());
  for (int64_t i = 0; i < T; ++i)
    for (int64_t j = 0; j < T; ++j) {
      const int64_t v = std::clamp<int64_t>(j - i + max_rel, 0, 2 * max_rel);
      out[i * T + j] += bias.data()[v * H + head];
    }
  auto pl = logits.n, pb = bias.n;
  return op_result(logits.shape(), std::move(out), {logits, bias},
                   [pl, pb, T, H, head, max_rel](Node& self) {
                     if (pl->requires_grad) {
                       pl->ensure_grad();
                       for (size_t i = 0; i < self.grad.size(); ++i)
                         pl->grad[i] += self.grad[i];
                     }
                     if (pb->requires_grad) {
                       pb->ensure_grad();
                       for (int64_t i = 0; i < T; ++i)
                         for (int64_t j = 0; j < T; ++j) {
                           const int64_t v =
                               std::clamp<int64_t>(j - i + max_rel, 0, 2 * max_rel);
                           pb->grad[v * H + head] += self.grad[i * T + j];
                         }
                     }
                   });
}

// ---------------------------------------------------------------------------
// signal framing / convolution

// x rank-1 [N] -> frames [n_frames x win]; frame t starts at t*hop + offset,
// positions outside [0, N) read as zero.
inline Tensor frame_signal(const Tensor& x, int n_frames, int win, int hop,
                           int offset) {
  require(x.rank() == 1, ErrorCode::ShapeMismatch, "ag", "frame_signal: rank 1");
  const int64_t N = x.numel();
  std::vector<double> out(static_cast<size_t>(n_frames) * win, 0.0);
  for (int t = 0; t < n_frames; ++t) {
    const int64_t start = static_cast<int64_t>(t) * hop + offset;
    for (int i = 0; i < win; ++i) {
      const int64_t j = start + i;
      if (j >= 0 && j < N) out[static_cast<size_t>(t) * win + i] = x.data()[j];
    }
  }
  auto px = x.n;
  return op_result({n_frames, win}, std::move(out), {x},
                   [px, n_frames, win, hop, offset, N](Node& self) {
                     if (!px->requires_grad) return;
                     px->ensure_grad();
                     for (int t = 0; t < n_frames; ++t) {
                       const int64_t start = static_cast<int64_t>(t) * hop + offset;
                       for (int i = 0; i < win; ++i) {
                         const int64_t j = start + i;
                         if (j >= 0 && j < N)
                           px->grad[j] += self.grad[static_cast<size_t>(t) * win + i];
                       }
                     }
                   });
}

// Insert (stride-1) zero rows between consecutive rows (transposed-conv helper).
inline Tensor zero_stuff_rows(const Tensor& x, int stride) {
  const int64_t T = x.rows(), C = x.cols();
  const int64_t To = (T - 1) * stride + 1;
  std::vector<double> out(static_cast<size_t>(To * C), 0.0);
  for (int64_t t = 0; t < T; ++t)
    std::copy_n(x.data().data() + t * C, C, out.data() + t * stride * C);
  auto px = x.n;
  return op_result({static_cast<int>(To), static_cast<int>(C)}, std::move(out),
                   {x}, [px, T, C, stride](Node& self) {
                     if (!px->requires_grad) return;
                     px->ensure_grad();
                     for (int64_t t = 0; t < T; ++t)
                       for (int64_t c = 0; c < C; ++c)
                         px->grad[t * C + c] += self.grad[t * stride * C + c];
                   });
}

/// 1-D convolution over [T x Cin] with weight [K*Cin x Cout] (k-major)
/// and optional bias [Cout]. Asymmetric zero padding, stride, dilation.
inline Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& b, int K,
                     int stride, int pad_l, int pad_r, int dilation = 1) {
  const int64_t T = x.rows(), Cin = x.cols();
  require(w.rows() == static_cast<int64_t>(K) * Cin, ErrorCode::ShapeMismatch,
          "ag", "conv1d: weight rows != K*Cin");
  const int64_t Cout = w.cols();
  const int64_t span = static_cast<int64_t>(dilation) * (K - 1) + 1;
  const int64_t To = (T + pad_l + pad_r - span) / stride + 1;
  require(To > 0, ErrorCode::ShapeMismatch, "ag", "conv1d: empty output");

  const int64_t KC = static_cast<int64_t>(K) * Cin;
  auto cols = std::make_shared<std::vector<double>>(
      static_cast<size_t>(To * KC), 0.0);
  for (int64_t to = 0; to < To; ++to) {
    const int64_t base = to * stride - pad_l;
    for (int k = 0; k < K; ++k) {
      const int64_t t = base + static_cast<int64_t>(k) * dilation;
      if (t >= 0 && t < T)
        std::copy_n(x.data().data() + t * Cin, Cin,
                    cols->data() + to * KC + static_cast<int64_t>(k) * Cin);
    }
  }
  std::vector<double> out(static_cast<size_t>(To * Cout));
  {
    ConstMap M(cols->data(), To, KC), W(w.data().data(), KC, Cout);
    MutMap Y(out.data(), To, Cout);
    Y.noalias() = M * W;
  }
  const bool has_bias = b.defined();
  if (has_bias) {
    require(b.numel() == Cout, ErrorCode::ShapeMismatch, "ag", "conv1d: bad bias");
    for (int64_t to = 0; to < To; ++to)
      for (int64_t c = 0; c < Cout; ++c) out[to * Cout + c] += b.data()[c];
  }

  std::vector<Tensor> parents{x, w};
  if (has_bias) parents.push_back(b);
  auto px = x.n, pw = w.n;
  auto pb = has_bias ? b.n : nullptr;
  return op_result(
      {static_cast<int>(To), static_cast<int>(Cout)}, std::move(out),
      std::move(parents),
      [px, pw, pb, cols, T, Cin, Cout, To, KC, K, stride, pad_l,
       dilation](Node& self) {
        ConstMap G(self.grad.data(), To, Cout);
        if (pw->requires_grad) {
          pw->ensure_grad();
          ConstMap M(cols->data(), To, KC);
          MutMap GW(pw->grad.data(), KC, Cout);
          GW.noalias() += M.transpose() * G;
        }
        if (pb && pb->requires_grad) {
          pb->ensure_grad();
          for (int64_t to = 0; to < To; ++to)
            for (int64_t c = 0; c < Cout; ++c)
              pb->grad[c] += self.grad[to * Cout + c];
        }
        if (px->requires_grad) {
          px->ensure_grad();
          std::vector<double> gm(static_cast<size_t>(To * KC));
          {
            ConstMap W(pw->val.data(), KC, Cout);
            MutMap GM(gm.data(), To, KC);
            GM.noalias() = G * W.transpose();
          }
          for (int64_t to = 0; to < To; ++to) {
            const int64_t base = to * stride - pad_l;
            for (int k = 0; k < K; ++k) {
              const int64_t t = base + static_cast<int64_t>(k) * dilation;
              if (t < 0 || t >= T) continue;
              const double* src = gm.data() + to * KC + static_cast<int64_t>(k) * Cin;
              double* dst = px->grad.data() + t * Cin;
              for (int64_t c = 0; c < Cin; ++c) dst[c] += src[c];
            }
          }
        }
      });
}

/// 2-D convolution over {H, W, C} with weight [KH*KW*Cin x Cout].
inline Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int KH,
                     int KW, int stride_h, int stride_w, int pad_h, int pad_w) {
  require(x.rank() == 3, ErrorCode::ShapeMismatch, "ag", "conv2d: rank-3 input");
  const int64_t H = x.dim(0), W_in = x.dim(1), Cin = x.dim(2);
  const int64_t KK = static_cast<int64_t>(KH) * KW * Cin;
  require(w.rows() == KK, ErrorCode::ShapeMismatch, "ag", "conv2d: weight rows");
  const int64_t Cout = w.cols();
  const int64_t Ho = (H + 2 * pad_h - KH) / stride_h + 1;
  const int64_t Wo = (W_in + 2 * pad_w - KW) / stride_w + 1;
  require(Ho > 0 && Wo > 0, ErrorCode::ShapeMismatch, "ag", "conv2d: empty output");

  auto cols = std::make_shared<std::vector<double>>(
      static_cast<size_t>(Ho * Wo * KK), 0.0);
  for (int64_t ho = 0; ho < Ho; ++ho)
    for (int64_t wo = 0; wo < Wo; ++wo) {
      double* dst = cols->data() + (ho * Wo + wo) * KK;
      for (int kh = 0; kh < KH; ++kh) {
        const int64_t h = ho * stride_h - pad_h + kh;
        if (h < 0 || h >= H) continue;
        for (int kw = 0; kw < KW; ++kw) {
          const int64_t ww = wo * stride_w - pad_w + kw;
          if (ww < 0 || ww >= W_in) continue;
          std::copy_n(x.data().data() + (h * W_in + ww) * Cin, Cin,
                      dst + (static_cast<int64_t>(kh) * KW + kw) * Cin);
        }
      }
    }
  std::vector<double> out(static_cast<size_t>(Ho * Wo * Cout));
  {
    ConstMap M(cols->data(), Ho * Wo, KK), Wm(w.data().data(), KK, Cout);
    MutMap Y(out.data(), Ho * Wo, Cout);
    Y.noalias() = M * Wm;
  }
  const bool has_bias = b.defined();
  if (has_bias)
    for (int64_t i = 0; i < Ho * Wo; ++i)
      for (int64_t c = 0; c < Cout; ++c) out[i * Cout + c] += b.data()[c];

  std::vector<Tensor> parents{x, w};
  if (has_bias) parents.push_back(b);
  auto px = x.n, pw = w.n;
  auto pb = has_bias ? b.n : nullptr;
  return op_result(
      {static_cast<int>(Ho), static_cast<int>(Wo), static_cast<int>(Cout)},
      std::move(out), std::move(parents),
      [px, pw, pb, cols, H, W_in, Cin, Cout, Ho, Wo, KK, KH, KW, stride_h,
       stride_w, pad_h, pad_w](Node& self) {
        ConstMap G(self.grad.data(), Ho * Wo, Cout);
        if (pw->requires_grad) {
          pw->ensure_grad();
          ConstMap M(cols->data(), Ho * Wo, KK);
          MutMap GW(pw->grad.data(), KK, Cout);
          GW.noalias() += M.transpose() * G;
        }
        if (pb && pb->requires_grad) {
          pb->ensure_grad();
          for (int64_t i = 0; i < Ho * Wo; ++i)
            for (int64_t c = 0; c < Cout; ++c)
              pb->grad[c] += self.grad[i * Cout + c];
        }
        if (px->requires_grad) {
          px->ensure_grad();
          std::vector<double> gm(static_cast<size_t>(Ho * Wo * KK));
          {
            ConstMap Wm(pw->val.data(), KK, Cout);
            MutMap GM(gm.data(), Ho * Wo, KK);
            GM.noalias() = G * Wm.transpose();
          }
          for (int64_t ho = 0; ho < Ho; ++ho)
            for (int64_t wo = 0; wo < Wo; ++wo) {
              const double* src = gm.data() + (ho * Wo + wo) * KK;
              for (int kh = 0; kh < KH; ++kh) {
                const int64_t h = ho * stride_h - pad_h + kh;
                if (h < 0 || h >= H) continue;
                for (int kw = 0; kw < KW; ++kw) {
                  const int64_t ww = wo * stride_w - pad_w + kw;
                  if (ww < 0 || ww >= W_in) continue;
                  double* dst = px->grad.data() + (h * W_in + ww) * Cin;
                  const double* s =
                      src + (static_cast<int64_t>(kh) * KW + kw) * Cin;
                  for (int64_t c = 0; c < Cin; ++c) dst[c] += s[c];
                }
              }
            }
        }
      });
}

}  // namespace hyface::ag
