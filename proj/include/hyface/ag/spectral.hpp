// Copyright (c) 2026 hyface authors
// Licensed under the Apache License, Version 2.0
//
// Differentiable mel spectrogram matching the DSP front-end definition
// bit-for-bit in transform (framing, window, DFT, filterbank, log clamp).
// Uses an explicit DFT basis so gradients flow through plain matmuls.

#pragma once

#include <map>
#include <tuple>

#include "hyface/ag/ops.hpp"
#include "hyface/dsp/dsp.hpp"

namespace hyface::ag {

namespace spectral_detail {

struct Basis {
  Tensor window;   // [win]
  Tensor cos_b;    // [win x bins]
  Tensor sin_b;    // [win x bins]
  Tensor mel_w;    // [bins x n_mels]
};

inline const Basis& basis_for(const dsp::DspConfig& cfg) {
  static std::map<std::tuple<int, int, int, int, int>, Basis> cache;
  auto key = std::make_tuple(cfg.n_fft, cfg.win, cfg.n_mels,
                             static_cast<int>(cfg.fmin), static_cast<int>(cfg.fmax));
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  NoGradGuard ng;
  Basis b;
  const int bins = cfg.n_fft / 2 + 1;
  auto win = dsp::hann_window(cfg.win);
  b.window = Tensor::make({cfg.win}, std::vector<double>(win.begin(), win.end()));

  std::vector<double> cosv(static_cast<size_t>(cfg.win) * bins);
  std::vector<double> sinv(static_cast<size_t>(cfg.win) * bins);
  for (int k = 0; k < cfg.win; ++k)
    for (int j = 0; j < bins; ++j) {
      const double ang = 2.0 * dsp::kPi * k * j / cfg.n_fft;
      cosv[static_cast<size_t>(k) * bins + j] = std::cos(ang);
      sinv[static_cast<size_t>(k) * bins + j] = std::sin(ang);
    }
  b.cos_b = Tensor::make({cfg.win, bins}, std::move(cosv));
  b.sin_b = Tensor::make({cfg.win, bins}, std::move(sinv));

  Matrix fb = dsp::mel_filterbank(cfg);  // [n_mels x bins]
  std::vector<double> melw(static_cast<size_t>(bins) * cfg.n_mels);
  for (int m = 0; m < cfg.n_mels; ++m)
    for (int k = 0; k < bins; ++k)
      melw[static_cast<size_t>(k) * cfg.n_mels + m] = fb.at(m, k);
  b.mel_w = Tensor::make({bins, cfg.n_mels}, std::move(melw));

  return cache.emplace(key, std::move(b)).first->second;
}

}  // namespace spectral_detail

/// Magnitude STFT of a rank-1 sample tensor; center-padded framing identical
/// to dsp::stft_magnitude. Output [n_frames x bins].
inline Tensor stft_magnitude_ag(const Tensor& samples, const dsp::DspConfig& cfg) {
  const auto& b = spectral_detail::basis_for(cfg);
  const int n_frames =
      static_cast<int>(cfg.n_frames(static_cast<size_t>(samples.numel())));
  Tensor frames =
      frame_signal(samples, n_frames, cfg.win, cfg.hop, -cfg.win / 2);
  frames = mul_rows(frames, b.window);
  Tensor re = matmul(frames, b.cos_b);
  Tensor im = matmul(frames, b.sin_b);
  return sqrt_eps(add(square(re), square(im)), 1e-18);
}

/// Log-mel of a rank-1 sample tensor. Matches dsp::mel_from_linear.
inline Tensor mel_spectrogram_ag(const Tensor& samples, const dsp::DspConfig& cfg) {
  const auto& b = spectral_detail::basis_for(cfg);
  Tensor mag = stft_magnitude_ag(samples, cfg);
  Tensor mel = matmul(mag, b.mel_w);
  return log_t(clamp_min(mel, dsp::kMelLogEps));
}

}  // namespace hyface::ag
