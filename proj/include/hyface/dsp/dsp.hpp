// Copyright (c) 2026 hyface authors
// Licensed under the Apache License, Version 2.0
//
// Deterministic signal-processing front-end: magnitude/mel spectrograms,
// YIN-style F0 extraction, and speaker-level pitch statistics. Everything
// here is a pure function of (samples, config); no hidden state.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

#include "hyface/dsp/fft.hpp"
#include "hyface/dsp/types.hpp"

namespace hyface::dsp {

inline constexpr double kPi = 3.14159265358979323846;

// Periodic Hann window of length `win`.
inline std::vector<double> hann_window(int win) {
  std::vector<double> w(win);
  for (int i = 0; i < win; ++i)
    w[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * i / win));
  return w;
}

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Triangular mel filterbank, peak-normalized to 1, [n_mels x n_fft/2+1].
inline Matrix mel_filterbank(const DspConfig& cfg) {
  const int bins = cfg.n_fft / 2 + 1;
  Matrix fb(cfg.n_mels, bins);
  const double mel_lo = hz_to_mel(cfg.fmin);
  const double mel_hi = hz_to_mel(cfg.fmax);
  std::vector<double> centers(cfg.n_mels + 2);
  for (int m = 0; m < cfg.n_mels + 2; ++m)
    centers[m] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * m / (cfg.n_mels + 1));
  const double bin_hz = static_cast<double>(cfg.sample_rate) / cfg.n_fft;
  for (int m = 0; m < cfg.n_mels; ++m) {
    const double lo = centers[m], mid = centers[m + 1], hi = centers[m + 2];
    for (int k = 0; k < bins; ++k) {
      const double f = k * bin_hz;
      double w = 0.0;
      if (f > lo && f < mid)
        w = (f - lo) / (mid - lo);
      else if (f >= mid && f < hi)
        w = (hi - f) / (hi - mid);
      fb.at(m, k) = w;
    }
  }
  return fb;
}

// Copy the window [start, start+len) out of x, zero-filling outside [0, n).
inline void window_with_zero_pad(const double* x, int64_t n, int64_t start,
                                 int64_t len, double* out) {
  for (int64_t i = 0; i < len; ++i) {
    const int64_t j = start + i;
    out[i] = (j >= 0 && j < n) ? x[j] : 0.0;
  }
}

/// Magnitude STFT under center padding: frame t covers samples
/// [t*hop - win/2, t*hop + win/2), zero-padded at the edges, so that
/// n_frames == floor(len/hop) + 1.
inline LinearSpectrogram stft_magnitude(const Waveform& wav, const DspConfig& cfg) {
  if (wav.sample_rate != cfg.sample_rate)
    fail(ErrorCode::SampleRateMismatch, "audio_dsp",
         "waveform at " + std::to_string(wav.sample_rate) + " Hz, config wants " +
             std::to_string(cfg.sample_rate));
  if (static_cast<int>(wav.samples.size()) < cfg.win)
    fail(ErrorCode::AudioTooShort, "audio_dsp",
         "need at least win=" + std::to_string(cfg.win) + " samples, got " +
             std::to_string(wav.samples.size()));
  check_finite(wav, "stft");

  const int64_t n = static_cast<int64_t>(wav.samples.size());
  const int64_t frames = cfg.n_frames(wav.samples.size());
  const int bins = cfg.n_fft / 2 + 1;
  const auto window = hann_window(cfg.win);

  LinearSpectrogram spec;
  spec.frames = Matrix(frames, bins);
  spec.hop = cfg.hop;
  spec.win = cfg.win;
  spec.n_fft = cfg.n_fft;

  std::vector<double> buf(cfg.win);
  for (int64_t t = 0; t < frames; ++t) {
    const int64_t start = t * cfg.hop - cfg.win / 2;
    window_with_zero_pad(wav.samples.data(), n, start, cfg.win, buf.data());
    for (int i = 0; i < cfg.win; ++i) buf[i] *= window[i];
    auto spectrum = rfft(buf.data(), buf.size(), cfg.n_fft);
    double* row = spec.frames.row(t);
    for (int k = 0; k < bins; ++k) row[k] = std::abs(spectrum[k]);
  }
  return spec;
}

inline MelSpectrogram mel_from_linear(const LinearSpectrogram& lin,
                                      const DspConfig& cfg) {
  const Matrix fb = mel_filterbank(cfg);
  MelSpectrogram mel;
  mel.frames = Matrix(lin.n_frames(), cfg.n_mels);
  mel.n_mels = cfg.n_mels;
  mel.fmin = cfg.fmin;
  mel.fmax = cfg.fmax;
  for (int64_t t = 0; t < lin.n_frames(); ++t) {
    const double* src = lin.frames.row(t);
    double* dst = mel.frames.row(t);
    for (int m = 0; m < cfg.n_mels; ++m) {
      double acc = 0.0;
      const double* w = fb.row(m);
      for (int64_t k = 0; k < lin.n_bins(); ++k) acc += w[k] * src[k];
      dst[m] = std::log(std::max(acc, kMelLogEps));
    }
  }
  return mel;
}

inline std::pair<LinearSpectrogram, MelSpectrogram> compute_spectrograms(
    const Waveform& wav, const DspConfig& cfg) {
  LinearSpectrogram lin = stft_magnitude(wav, cfg);
  MelSpectrogram mel = mel_from_linear(lin, cfg);
  return {std::move(lin), std::move(mel)};
}

namespace detail {

// Cumulative-mean-normalized difference function of one analysis window.
// x points at (integration + tau_max) samples.
inline void yin_cmnd(const double* x, int w, int tau_max, std::vector<double>& d,
                     std::vector<double>& dp) {
  d.assign(tau_max + 1, 0.0);
  dp.assign(tau_max + 1, 1.0);
  for (int tau = 1; tau <= tau_max; ++tau) {
    double acc = 0.0;
    for (int j = 0; j < w; ++j) {
      const double diff = x[j] - x[j + tau];
      acc += diff * diff;
    }
    d[tau] = acc;
  }
  double cum = 0.0;
  for (int tau = 1; tau <= tau_max; ++tau) {
    cum += d[tau];
    dp[tau] = (cum > 0.0) ? d[tau] * tau / cum : 1.0;
  }
}

}  // namespace detail

/// YIN-style F0 extraction (difference function + cumulative-mean
/// normalization + parabolic interpolation). Frames align exactly with
/// stft_magnitude for the same hop.
inline F0Contour extract_f0(const Waveform& wav, const DspConfig& cfg) {
  if (wav.sample_rate != cfg.sample_rate)
    fail(ErrorCode::SampleRateMismatch, "audio_dsp",
         "waveform at " + std::to_string(wav.sample_rate) + " Hz");
  if (static_cast<int>(wav.samples.size()) < cfg.win)
    fail(ErrorCode::AudioTooShort, "audio_dsp", "waveform shorter than one window");
  check_finite(wav, "extract_f0");

  const int sr = cfg.sample_rate;
  const int tau_min = std::max(2, static_cast<int>(std::floor(sr / cfg.f0_ceil)));
  const int tau_max = static_cast<int>(std::ceil(sr / cfg.f0_floor));
  const int w_int = 2 * tau_max;  // integration window
  const int span = w_int + tau_max;

  const int64_t n = static_cast<int64_t>(wav.samples.size());
  const int64_t frames = cfg.n_frames(wav.samples.size());

  F0Contour out;
  out.values.assign(frames, 0.0);
  out.voiced.assign(frames, 0);

  std::vector<double> buf(span), d, dp;
  for (int64_t t = 0; t < frames; ++t) {
    const int64_t center = t * cfg.hop;
    window_with_zero_pad(wav.samples.data(), n, center - span / 2, span, buf.data());

    double rms = 0.0;
    for (double s : buf) rms += s * s;
    rms = std::sqrt(rms / span);
    if (rms < 1e-6) continue;  // silence gate

    detail::yin_cmnd(buf.data(), w_int, tau_max, d, dp);

    int tau = -1;
    for (int k = tau_min; k <= tau_max; ++k) {
      if (dp[k] < cfg.yin_threshold) {
        tau = k;
        while (tau + 1 <= tau_max && dp[tau + 1] < dp[tau]) ++tau;
        break;
      }
    }
    if (tau < 0) continue;  // no dip below threshold: unvoiced

    double period = tau;
    if (tau > tau_min && tau < tau_max) {
      const double a = dp[tau - 1], b = dp[tau], c = dp[tau + 1];
      const double denom = a - 2.0 * b + c;
      if (std::abs(denom) > 1e-12) {
        double delta = 0.5 * (a - c) / denom;
        delta = std::clamp(delta, -0.5, 0.5);
        period = tau + delta;
      }
    }
    const double f0 = sr / period;
    if (f0 < cfg.f0_floor || f0 > cfg.f0_ceil) continue;
    out.values[t] = f0;
    out.voiced[t] = 1;
  }
  return out;
}

/// Voiced-frame pooled mean over a speaker's contours. Unvoiced frames are
/// excluded: they carry F0 == 0 and would drag the mean toward zero.
inline SpeakerAvgF0 compute_speaker_avg_f0(const std::vector<F0Contour>& contours,
                                           const std::string& speaker_id = "") {
  double sum = 0.0;
  int64_t count = 0;
  for (const auto& c : contours) {
    for (size_t i = 0; i < c.values.size(); ++i) {
      if (c.voiced[i]) {
        sum += c.values[i];
        ++count;
      }
    }
  }
  if (count == 0)
    fail(ErrorCode::NoVoicedFrames, "audio_dsp",
         "no voiced frames for speaker '" + speaker_id + "'");
  return SpeakerAvgF0{speaker_id, sum / static_cast<double>(count), count};
}

/// Mean and population standard deviation of per-speaker average F0.
inline std::pair<double, double> f0_statistics(
    const std::vector<SpeakerAvgF0>& avg_f0s) {
  if (avg_f0s.empty())
    fail(ErrorCode::EmptyInput, "audio_dsp", "f0_statistics over empty list");
  double mean = 0.0;
  for (const auto& a : avg_f0s) mean += a.avg_f0;
  mean /= static_cast<double>(avg_f0s.size());
  double var = 0.0;
  for (const auto& a : avg_f0s) {
    const double d = a.avg_f0 - mean;
    var += d * d;
  }
  var /= static_cast<double>(avg_f0s.size());
  return {mean, std::sqrt(var)};
}

/// Mean F0 over voiced frames of a single waveform.
inline double voiced_mean_f0(const Waveform& wav, const DspConfig& cfg) {
  F0Contour c = extract_f0(wav, cfg);
  double sum = 0.0;
  int64_t n = 0;
  for (size_t i = 0; i < c.values.size(); ++i)
    if (c.voiced[i]) {
      sum += c.values[i];
      ++n;
    }
  if (n == 0) fail(ErrorCode::NoVoicedFrames, "audio_dsp", "no voiced frames");
  return sum / static_cast<double>(n);
}

/// Welch-averaged spectral flatness (geometric over arithmetic mean of the
/// power spectrum, DC excluded). White noise sits near 1, a tone near 0.
inline double spectral_flatness(const std::vector<double>& samples,
                                int n_fft = 2048) {
  if (static_cast<int>(samples.size()) < n_fft)
    fail(ErrorCode::AudioTooShort, "audio_dsp", "flatness needs >= n_fft samples");
  const auto window = hann_window(n_fft);
  const int bins = n_fft / 2 + 1;
  std::vector<double> power(bins, 0.0);
  int count = 0;
  std::vector<double> buf(n_fft);
  for (size_t start = 0; start + n_fft <= samples.size(); start += n_fft / 2) {
    for (int i = 0; i < n_fft; ++i) buf[i] = samples[start + i] * window[i];
    auto spec = rfft(buf.data(), buf.size(), n_fft);
    for (int k = 0; k < bins; ++k) power[k] += std::norm(spec[k]);
    ++count;
  }
  double log_sum = 0.0, lin_sum = 0.0;
  const int used = bins - 1;  // skip DC
  for (int k = 1; k < bins; ++k) {
    const double p = power[k] / count + 1e-30;
    log_sum += std::log(p);
    lin_sum += p;
  }
  return std::exp(log_sum / used) / (lin_sum / used);
}

/// Location (Hz) of the dominant magnitude peak of a single FFT.
inline double dominant_frequency(const std::vector<double>& samples,
                                 int sample_rate, int n_fft) {
  auto spec = rfft(samples.data(), std::min(samples.size(), size_t(n_fft)), n_fft);
  int best = 1;
  double best_mag = 0.0;
  for (size_t k = 1; k < spec.size(); ++k) {
    const double m = std::abs(spec[k]);
    if (m > best_mag) {
      best_mag = m;
      best = static_cast<int>(k);
    }
  }
  return static_cast<double>(best) * sample_rate / n_fft;
}

}  // namespace hyface::dsp
