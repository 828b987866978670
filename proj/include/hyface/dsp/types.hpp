// Copyright (c) 2026 hyface authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "hyface/core/error.hpp"
#include "hyface/core/kv_config.hpp"
#include "hyface/core/matrix.hpp"

namespace hyface::dsp {

/// 16 kHz mono audio, samples in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;

  size_t size() const { return samples.size(); }
  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

inline void check_finite(const Waveform& wav, const char* where) {
  for (double s : wav.samples)
    if (!std::isfinite(s))
      fail(ErrorCode::DecodeError, "audio_dsp",
           std::string(where) + ": non-finite sample");
}

// Natural-log clamp floor for mel compression; applied as log(max(x, eps)).
inline constexpr double kMelLogEps = 1e-5;

struct DspConfig {
  int sample_rate = 16000;
  int n_fft = 1024;
  int hop = 320;   // 20 ms at 16 kHz; one frame per 50 Hz content step
  int win = 1024;
  int n_mels = 80;
  double fmin = 0.0;
  double fmax = 8000.0;
  double f0_floor = 50.0;
  double f0_ceil = 800.0;
  double yin_threshold = 0.15;

  void validate() const {
    require(sample_rate > 0, ErrorCode::ConfigParse, "audio_dsp", "sample_rate > 0");
    require(n_fft > 0 && (n_fft & (n_fft - 1)) == 0, ErrorCode::ConfigParse,
            "audio_dsp", "n_fft must be a power of two");
    require(win <= n_fft, ErrorCode::ConfigParse, "audio_dsp", "win <= n_fft");
    require(hop > 0 && hop <= win, ErrorCode::ConfigParse, "audio_dsp",
            "0 < hop <= win");
    require(f0_floor > 0 && f0_ceil > f0_floor, ErrorCode::ConfigParse,
            "audio_dsp", "0 < f0_floor < f0_ceil");
    require(fmax <= sample_rate / 2.0, ErrorCode::ConfigParse, "audio_dsp",
            "fmax <= Nyquist");
  }

  void to_kv(KvMap& kv) const {
    kv.set_int("sample_rate", sample_rate);
    kv.set_int("n_fft", n_fft);
    kv.set_int("hop", hop);
    kv.set_int("win", win);
    kv.set_int("n_mels", n_mels);
    kv.set_double("fmin", fmin);
    kv.set_double("fmax", fmax);
    kv.set_double("f0_floor", f0_floor);
    kv.set_double("f0_ceil", f0_ceil);
    kv.set_double("yin_threshold", yin_threshold);
  }

  static DspConfig from_kv(KvMap& kv) {
    DspConfig c;
    c.sample_rate = static_cast<int>(kv.get_int("sample_rate", c.sample_rate));
    c.n_fft = static_cast<int>(kv.get_int("n_fft", c.n_fft));
    c.hop = static_cast<int>(kv.get_int("hop", c.hop));
    c.win = static_cast<int>(kv.get_int("win", c.win));
    c.n_mels = static_cast<int>(kv.get_int("n_mels", c.n_mels));
    c.fmin = kv.get_double("fmin", c.fmin);
    c.fmax = kv.get_double("fmax", c.fmax);
    c.f0_floor = kv.get_double("f0_floor", c.f0_floor);
    c.f0_ceil = kv.get_double("f0_ceil", c.f0_ceil);
    c.yin_threshold = kv.get_double("yin_threshold", c.yin_threshold);
    c.validate();
    return c;
  }

  // Frame count under center padding.
  int64_t n_frames(size_t n_samples) const {
    return static_cast<int64_t>(n_samples) / hop + 1;
  }
};

/// Magnitude STFT, frames x (n_fft/2 + 1).
struct LinearSpectrogram {
  Matrix frames;
  int hop = 0;
  int win = 0;
  int n_fft = 0;
  int64_t n_frames() const { return frames.rows; }
  int64_t n_bins() const { return frames.cols; }
};

/// Log-compressed mel energies, frames x n_mels.
struct MelSpectrogram {
  Matrix frames;
  int n_mels = 0;
  double fmin = 0.0;
  double fmax = 0.0;
  int64_t n_frames() const { return frames.rows; }
};

/// Frame-wise pitch track. values[i] == 0 exactly when voiced[i] is false.
struct F0Contour {
  std::vector<double> values;   // Hz, 0 for unvoiced
  std::vector<uint8_t> voiced;  // parallel to values

  int64_t n_frames() const { return static_cast<int64_t>(values.size()); }
  int64_t n_voiced() const {
    int64_t n = 0;
    for (auto v : voiced) n += v ? 1 : 0;
    return n;
  }
};

struct SpeakerAvgF0 {
  std::string speaker_id;
  double avg_f0 = 0.0;
  int64_t n_voiced_frames = 0;
};

}  // namespace hyface::dsp
