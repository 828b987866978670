// Copyright (c) 2026 hyface authors
// Licensed under the Apache License, Version 2.0

#include <catch2/catch_amalgamated.hpp>

#include "gradcheck.hpp"
#include "helpers.hpp"
#include "hyface/ag/ops.hpp"
#include "hyface/ag/spectral.hpp"
#include "hyface/nn/layers.hpp"

using namespace hyface;
using namespace hyface::ag;
using testing_util::check_gradients;

namespace {

Tensor rand_t(std::vector<int> shape, Rng& rng, bool rg = true) {
  return Tensor::randn(std::move(shape), rng, 1.0, rg);
}

}  // namespace

TEST_CASE("elementwise and reduction gradients") {
  Rng rng(1);
  auto x = rand_t({3, 4}, rng);
  auto y = rand_t({3, 4}, rng);

  auto composite = [&]() {
    Tensor a = mul(tanh_t(x), sigmoid_t(y));
    Tensor b = add(exp_t(mul_scalar(x, 0.3)), softplus_t(y));
    Tensor c = sub(a, mul(b, square(x)));
    Tensor d = add_scalar(abs_t(c), 0.5);
    return mean_all(mul(d, leaky_relu(c, 0.2)));
  };
  auto res = check_gradients({x, y}, composite);
  INFO(res.detail);
  CHECK(res.ok);
}

TEST_CASE("matmul, transpose, softmax, layer norm gradients") {
  Rng rng(2);
  auto a = rand_t({3, 5}, rng);
  auto b = rand_t({5, 4}, rng);
  auto g = Tensor::full({4}, 1.0, true);
  auto be = Tensor::zeros({4}, true);

  auto f = [&]() {
    Tensor m = matmul(a, b);
    Tensor ln = layer_norm(m, g, be);
    Tensor sm = softmax_rows(matmul(ln, transpose(ln)));
    return mean_all(sm);
  };
  auto res = check_gradients({a, b, g, be}, f);
  INFO(res.detail);
  CHECK(res.ok);
}

TEST_CASE("slice/concat/reverse/gather gradients") {
  Rng rng(3);
  auto x = rand_t({4, 6}, rng);
  auto bias = rand_t({9, 2}, rng);  // max_rel 4, 2 heads

  auto f = [&]() {
    Tensor a = slice_cols(x, 0, 3);
    Tensor b = slice_cols(x, 3, 6);
    Tensor c = concat_cols(mul(a, b), reverse_cols(a));
    Tensor r = concat_rows(slice_rows(c, 0, 2), slice_rows(c, 2, 4));
    Tensor logits = matmul(r, transpose(r));
    logits = add_rel_bias(logits, bias, 1, 4);
    return mean_all(square(logits));
  };
  auto res = check_gradients({x, bias}, f);
  INFO(res.detail);
  CHECK(res.ok);
}

TEST_CASE("conv1d gradients incl. stride, pad, dilation") {
  Rng rng(4);
  auto x = rand_t({8, 3}, rng);
  auto w = rand_t({5 * 3, 2}, rng);
  auto b = rand_t({2}, rng);

  auto f = [&]() {
    Tensor y = conv1d(x, w, b, 5, 2, 3, 1, 1);
    return mean_all(square(y));
  };
  auto res = check_gradients({x, w, b}, f);
  INFO(res.detail);
  CHECK(res.ok);

  auto fd = [&]() {
    Tensor y = conv1d(x, w, b, 5, 1, 4, 4, 2);
    return mean_all(abs_t(y));
  };
  auto res2 = check_gradients({x, w, b}, fd);
  INFO(res2.detail);
  CHECK(res2.ok);
}

TEST_CASE("zero_stuff + conv realizes an exact transposed conv") {
  Rng rng(5);
  nn::ConvTranspose1d up_even(3, 2, 4, rng);
  nn::ConvTranspose1d up_odd(3, 2, 5, rng);
  auto x = rand_t({7, 3}, rng);
  CHECK(up_even.forward(x).rows() == 28);
  CHECK(up_odd.forward(x).rows() == 35);

  auto f = [&]() { return mean_all(square(up_even.forward(x))); };
  auto res = check_gradients({x}, f);
  INFO(res.detail);
  CHECK(res.ok);
}

TEST_CASE("conv2d gradients") {
  Rng rng(6);
  auto x = rand_t({6, 3, 2}, rng);
  auto w = rand_t({3 * 1 * 2, 4}, rng);
  auto b = rand_t({4}, rng);

  auto f = [&]() {
    Tensor y = conv2d(x, w, b, 3, 1, 2, 1, 1, 0);
    return mean_all(square(y));
  };
  auto res = check_gradients({x, w, b}, f);
  INFO(res.detail);
  CHECK(res.ok);
}

TEST_CASE("nn blocks backprop end to end") {
  Rng rng(7);
  nn::TransformerBlock block(8, 2, rng);
  nn::WaveNetStack wn(6, 4, 2, 3, rng);
  auto x = rand_t({5, 8}, rng);
  auto xw = rand_t({5, 6}, rng);
  auto cond = rand_t({1, 4}, rng);

  auto f = [&]() {
    Tensor t = block.forward(x);
    Tensor w = wn.forward(xw, cond);
    return add(mean_all(square(t)), mean_all(abs_t(w)));
  };
  auto res = check_gradients({x, xw, cond}, f, 2e-3);
  INFO(res.detail);
  CHECK(res.ok);

  // every parameter of both blocks receives gradient flow somewhere
  nn::ParamList params;
  block.params(params, "b");
  wn.params(params, "w");
  for (auto& p : params) p.tensor.n->grad.assign(p.tensor.n->val.size(), 0.0);
  f().backward();
  int with_grad = 0;
  for (auto& p : params) {
    double mag = 0.0;
    for (double g : p.tensor.n->grad) mag += std::abs(g);
    if (mag > 0.0) ++with_grad;
  }
  CHECK(with_grad == static_cast<int>(params.size()));
}

TEST_CASE("no-grad mode builds no graph") {
  Rng rng(8);
  auto x = rand_t({3, 3}, rng);
  NoGradGuard ng;
  Tensor y = mul(x, x);
  CHECK_FALSE(y.requires_grad());
  CHECK(y.n->parents.empty());
}

TEST_CASE("detach blocks gradients") {
  Rng rng(9);
  auto x = rand_t({2, 2}, rng);
  Tensor y = mean_all(square(x.detach()));
  CHECK_FALSE(y.requires_grad());
}

TEST_CASE("differentiable mel matches the DSP mel exactly on shared input") {
  dsp::DspConfig cfg;
  auto wav = testing_util::sine_wave(330.0, 0.3);
  auto mel_plain = dsp::compute_spectrograms(wav, cfg).second;

  auto lin_plain = dsp::stft_magnitude(wav, cfg);

  NoGradGuard ng;
  Tensor samples = Tensor::make(
      {static_cast<int>(wav.samples.size())},
      std::vector<double>(wav.samples.begin(), wav.samples.end()));
  Tensor mag_ag = stft_magnitude_ag(samples, cfg);
  Tensor mel_ag = mel_spectrogram_ag(samples, cfg);

  REQUIRE(mag_ag.rows() == lin_plain.n_frames());
  double worst_mag = 0.0;
  for (int64_t i = 0; i < lin_plain.frames.size(); ++i)
    worst_mag =
        std::max(worst_mag, std::abs(mag_ag.data()[i] - lin_plain.frames.v[i]));
  CHECK(worst_mag < 1e-9);

  REQUIRE(mel_ag.rows() == mel_plain.n_frames());
  REQUIRE(mel_ag.cols() == cfg.n_mels);
  // log of near-eps mel energies amplifies last-ulp magnitude differences
  double worst = 0.0;
  for (int64_t i = 0; i < mel_plain.frames.size(); ++i)
    worst = std::max(worst, std::abs(mel_ag.data()[i] - mel_plain.frames.v[i]));
  CHECK(worst < 1e-5);
}

TEST_CASE("mel gradients flow back to the samples") {
  dsp::DspConfig cfg;
  cfg.n_fft = 64;
  cfg.win = 64;
  cfg.hop = 16;
  cfg.n_mels = 8;
  cfg.fmax = 8000.0;
  Rng rng(10);
  auto samples = Tensor::randn({96}, rng, 0.2, true);

  auto f = [&]() { return mean_all(mel_spectrogram_ag(samples, cfg)); };
  auto res = check_gradients({samples}, f, 2e-3);
  INFO(res.detail);
  CHECK(res.ok);
}
