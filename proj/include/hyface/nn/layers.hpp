// Copyright (c) 2026 hyface authors
// Licensed under the Apache License, Version 2.0
//
// Network building blocks. Modules own their parameters as ag::Tensors and
// expose them through params() for the optimizer and checkpoint writer;
// registration order is construction order and must stay stable across runs.

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "hyface/ag/ops.hpp"

namespace hyface::nn {

struct ParamEntry {
  std::string name;
  ag::Tensor tensor;
};
using ParamList = std::vector<ParamEntry>;

inline void add_param(ParamList& out, const std::string& name,
                      const ag::Tensor& t) {
  out.push_back({name, t});
}

class Linear {
 public:
  Linear() = default;
  Linear(int in, int out, Rng& rng, bool bias = true, double init_scale = -1.0) {
    const double stdev = init_scale >= 0.0 ? init_scale : 1.0 / std::sqrt(in);
    w_ = ag::Tensor::randn({in, out}, rng, stdev, true);
    if (bias) b_ = ag::Tensor::zeros({out}, true);
  }

  ag::Tensor forward(const ag::Tensor& x) const {
    ag::Tensor y = ag::matmul(x, w_);
    if (b_.defined()) y = ag::add_rows(y, b_);
    return y;
  }

  void params(ParamList& out, const std::string& prefix) const {
    add_param(out, prefix + ".w", w_);
    if (b_.defined()) add_param(out, prefix + ".b", b_);
  }

  ag::Tensor& weight() { return w_; }
  ag::Tensor& bias() { return b_; }
  int in_features() const { return w_.rows(); }
  int out_features() const { return w_.cols(); }

 private:
  ag::Tensor w_, b_;
};

class Conv1d {
 public:
  Conv1d() = default;
  Conv1d(int cin, int cout, int kernel, Rng& rng, int stride = 1, int pad = -1,
         int dilation = 1, bool bias = true, double init_scale = -1.0)
      : k_(kernel), stride_(stride), dilation_(dilation) {
    pad_ = pad >= 0 ? pad : dilation * (kernel - 1) / 2;
    const double stdev =
        init_scale >= 0.0 ? init_scale : 1.0 / std::sqrt(double(kernel) * cin);
    w_ = ag::Tensor::randn({kernel * cin, cout}, rng, stdev, true);
    if (bias) b_ = ag::Tensor::zeros({cout}, true);
  }

  ag::Tensor forward(const ag::Tensor& x) const {
    return ag::conv1d(x, w_, b_, k_, stride_, pad_, pad_, dilation_);
  }

  void params(ParamList& out, const std::string& prefix) const {
    add_param(out, prefix + ".w", w_);
    if (b_.defined()) add_param(out, prefix + ".b", b_);
  }

  ag::Tensor& weight() { return w_; }

 private:
  ag::Tensor w_, b_;
  int k_ = 0, stride_ = 1, pad_ = 0, dilation_ = 1;
};

/// Transposed 1-D convolution producing exactly stride*T rows for input T.
/// Kernel is 2*stride wide; implemented as zero-stuffing plus a plain conv.
class ConvTranspose1d {
 public:
  ConvTranspose1d() = default;
  ConvTranspose1d(int cin, int cout, int stride, Rng& rng, bool bias = true)
      : stride_(stride), k_(2 * stride) {
    if (stride % 2 == 0) {
      pad_conv_ = k_ - 1 - stride / 2;
      extra_right_ = 0;
    } else {
      pad_conv_ = k_ - 1 - (stride + 1) / 2;
      extra_right_ = 1;
    }
    const double stdev = 1.0 / std::sqrt(double(k_) * cin);
    w_ = ag::Tensor::randn({k_ * cin, cout}, rng, stdev, true);
    if (bias) b_ = ag::Tensor::zeros({cout}, true);
  }

  ag::Tensor forward(const ag::Tensor& x) const {
    ag::Tensor up = ag::zero_stuff_rows(x, stride_);
    return ag::conv1d(up, w_, b_, k_, 1, pad_conv_, pad_conv_ + extra_right_, 1);
  }

  void params(ParamList& out, const std::string& prefix) const {
    add_param(out, prefix + ".w", w_);
    if (b_.defined()) add_param(out, prefix + ".b", b_);
  }

 private:
  ag::Tensor w_, b_;
  int stride_ = 1, k_ = 2, pad_conv_ = 0, extra_right_ = 0;
};

class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(int cin, int cout, int kh, int kw, Rng& rng, int stride_h = 1,
         int stride_w = 1, int pad_h = -1, int pad_w = -1, bool bias = true)
      : kh_(kh), kw_(kw), sh_(stride_h), sw_(stride_w) {
    ph_ = pad_h >= 0 ? pad_h : (kh - 1) / 2;
    pw_ = pad_w >= 0 ? pad_w : (kw - 1) / 2;
    const double stdev = 1.0 / std::sqrt(double(kh) * kw * cin);
    w_ = ag::Tensor::randn({kh * kw * cin, cout}, rng, stdev, true);
    if (bias) b_ = ag::Tensor::zeros({cout}, true);
  }

  ag::Tensor forward(const ag::Tensor& x) const {
    return ag::conv2d(x, w_, b_, kh_, kw_, sh_, sw_, ph_, pw_);
  }

  void params(ParamList& out, const std::string& prefix) const {
    add_param(out, prefix + ".w", w_);
    if (b_.defined()) add_param(out, prefix + ".b", b_);
  }

 private:
  ag::Tensor w_, b_;
  int kh_ = 0, kw_ = 0, sh_ = 1, sw_ = 1, ph_ = 0, pw_ = 0;
};

class LayerNorm {
 public:
  LayerNorm() = default;
  explicit LayerNorm(int dim) {
    gamma_ = ag::Tensor::full({dim}, 1.0, true);
    beta_ = ag::Tensor::zeros({dim}, true);
  }

  ag::Tensor forward(const ag::Tensor& x) const {
    return ag::layer_norm(x, gamma_, beta_);
  }

  void params(ParamList& out, const std::string& prefix) const {
    add_param(out, prefix + ".gamma", gamma_);
    add_param(out, prefix + ".beta", beta_);
  }

 private:
  ag::Tensor gamma_, beta_;
};

/// Self-attention with learned, clipped relative-position bias.
class MultiHeadSelfAttention {
 public:
  MultiHeadSelfAttention() = default;
  MultiHeadSelfAttention(int dim, int heads, Rng& rng, int max_rel = 32)
      : dim_(dim), heads_(heads), max_rel_(max_rel) {
    require(dim % heads == 0, ErrorCode::ShapeMismatch, "nn",
            "attention dim must divide heads");
    q_ = Linear(dim, dim, rng);
    k_ = Linear(dim, dim, rng);
    v_ = Linear(dim, dim, rng);
    o_ = Linear(dim, dim, rng);
    rel_bias_ = ag::Tensor::randn({2 * max_rel + 1, heads}, rng, 0.02, true);
  }

  ag::Tensor forward(const ag::Tensor& x) const {
    const int dh = dim_ / heads_;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    ag::Tensor q = q_.forward(x), k = k_.forward(x), v = v_.forward(x);
    ag::Tensor out;
    for (int h = 0; h < heads_; ++h) {
      ag::Tensor qh = ag::mul_scalar(ag::slice_cols(q, h * dh, (h + 1) * dh), scale);
      ag::Tensor kh = ag::slice_cols(k, h * dh, (h + 1) * dh);
      ag::Tensor vh = ag::slice_cols(v, h * dh, (h + 1) * dh);
      ag::Tensor logits = ag::matmul(qh, ag::transpose(kh));
      logits = ag::add_rel_bias(logits, rel_bias_, h, max_rel_);
      ag::Tensor oh = ag::matmul(ag::softmax_rows(logits), vh);
      out = h == 0 ? oh : ag::concat_cols(out, oh);
    }
    return o_.forward(out);
  }

  void params(ParamList& out, const std::string& prefix) const {
    q_.params(out, prefix + ".q");
    k_.params(out, prefix + ".k");
    v_.params(out, prefix + ".v");
    o_.params(out, prefix + ".o");
    add_param(out, prefix + ".rel_bias", rel_bias_);
  }

 private:
  Linear q_, k_, v_, o_;
  ag::Tensor rel_bias_;
  int dim_ = 0, heads_ = 0, max_rel_ = 0;
};

/// Pre-norm transformer block: x + attn(ln(x)); x + mlp(ln(x)).
class TransformerBlock {
 public:
  TransformerBlock() = default;
  TransformerBlock(int dim, int heads, Rng& rng, int mlp_mult = 2,
                   int max_rel = 32)
      : ln1_(dim), ln2_(dim), attn_(dim, heads, rng, max_rel),
        fc1_(dim, dim * mlp_mult, rng), fc2_(dim * mlp_mult, dim, rng) {}

  ag::Tensor forward(const ag::Tensor& x) const {
    ag::Tensor h = ag::add(x, attn_.forward(ln1_.forward(x)));
    ag::Tensor m = fc2_.forward(ag::gelu(fc1_.forward(ln2_.forward(h))));
    return ag::add(h, m);
  }

  void params(ParamList& out, const std::string& prefix) const {
    ln1_.params(out, prefix + ".ln1");
    ln2_.params(out, prefix + ".ln2");
    attn_.params(out, prefix + ".attn");
    fc1_.params(out, prefix + ".fc1");
    fc2_.params(out, prefix + ".fc2");
  }

 private:
  LayerNorm ln1_, ln2_;
  MultiHeadSelfAttention attn_;
  Linear fc1_, fc2_;
};

/// Dilated gated residual stack with global (per-sequence) conditioning.
class WaveNetStack {
 public:
  WaveNetStack() = default;
  WaveNetStack(int hidden, int cond_dim, int layers, int kernel, Rng& rng)
      : hidden_(hidden), layers_(layers) {
    for (int i = 0; i < layers; ++i) {
      const int dilation = 1 << i;
      in_convs_.emplace_back(hidden, 2 * hidden, kernel, rng, 1, -1, dilation);
      cond_projs_.emplace_back(cond_dim, 2 * hidden, rng);
      const int rs_out = (i == layers - 1) ? hidden : 2 * hidden;
      res_skip_.emplace_back(hidden, rs_out, rng);
    }
  }

  // x [T x hidden], cond [1 x cond_dim] -> [T x hidden] (skip sum)
  ag::Tensor forward(const ag::Tensor& x_in, const ag::Tensor& cond) const {
    ag::Tensor x = x_in;
    ag::Tensor skip;
    for (int i = 0; i < layers_; ++i) {
      ag::Tensor h = in_convs_[i].forward(x);
      h = ag::add_rows(h, cond_projs_[i].forward(cond));
      ag::Tensor a = ag::tanh_t(ag::slice_cols(h, 0, hidden_));
      ag::Tensor g = ag::sigmoid_t(ag::slice_cols(h, hidden_, 2 * hidden_));
      ag::Tensor act = ag::mul(a, g);
      ag::Tensor rs = res_skip_[i].forward(act);
      if (i == layers_ - 1) {
        skip = skip.defined() ? ag::add(skip, rs) : rs;
      } else {
        x = ag::add(x, ag::slice_cols(rs, 0, hidden_));
        ag::Tensor s = ag::slice_cols(rs, hidden_, 2 * hidden_);
        skip = skip.defined() ? ag::add(skip, s) : s;
      }
    }
    return skip;
  }

  void params(ParamList& out, const std::string& prefix) const {
    for (int i = 0; i < layers_; ++i) {
      const std::string p = prefix + ".layer" + std::to_string(i);
      in_convs_[i].params(out, p + ".in");
      cond_projs_[i].params(out, p + ".cond");
      res_skip_[i].params(out, p + ".res_skip");
    }
  }

 private:
  std::vector<Conv1d> in_convs_;
  std::vector<Linear> cond_projs_;
  std::vector<Linear> res_skip_;
  int hidden_ = 0, layers_ = 0;
};

}  // namespace hyface::nn
