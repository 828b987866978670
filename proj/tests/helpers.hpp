// Copyright (c) 2026 hyface authors
// Licensed under the Apache License, Version 2.0
//
// Shared test utilities: synthetic signals, temp directories, and the
// F0-accuracy check reused by the acceptance suite.

#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <unistd.h>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "hyface/core/rng.hpp"
#include "hyface/dsp/dsp.hpp"

namespace testing_util {

inline constexpr double kPi = 3.14159265358979323846;

inline hyface::dsp::Waveform sine_wave(double freq, double seconds,
                                       int sr = 16000, double amp = 0.6) {
  hyface::dsp::Waveform w;
  w.sample_rate = sr;
  const auto n = static_cast<size_t>(seconds * sr);
  w.samples.resize(n);
  for (size_t i = 0; i < n; ++i)
    w.samples[i] = amp * std::sin(2.0 * kPi * freq * i / sr);
  return w;
}

inline hyface::dsp::Waveform sawtooth_wave(double freq, double seconds,
                                           int sr = 16000, double amp = 0.5) {
  hyface::dsp::Waveform w;
  w.sample_rate = sr;
  const auto n = static_cast<size_t>(seconds * sr);
  w.samples.resize(n);
  for (size_t i = 0; i < n; ++i) {
    const double phase = std::fmod(freq * i / sr, 1.0);
    w.samples[i] = amp * (2.0 * phase - 1.0);
  }
  return w;
}

inline hyface::dsp::Waveform silence(double seconds, int sr = 16000) {
  hyface::dsp::Waveform w;
  w.sample_rate = sr;
  w.samples.assign(static_cast<size_t>(seconds * sr), 0.0);
  return w;
}

// Additive white noise at the requested SNR (dB) relative to the signal.
inline void add_noise_snr(hyface::dsp::Waveform& w, double snr_db, uint64_t seed) {
  double power = 0.0;
  for (double s : w.samples) power += s * s;
  power /= static_cast<double>(w.samples.size());
  const double noise_std = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
  hyface::Rng rng(seed);
  for (double& s : w.samples) s += noise_std * rng.normal();
}

// Frames whose full YIN analysis window lies inside the signal.
inline std::pair<int64_t, int64_t> interior_f0_frames(
    const hyface::dsp::DspConfig& cfg, size_t n_samples) {
  const int tau_max = static_cast<int>(std::ceil(cfg.sample_rate / cfg.f0_floor));
  const int span = 3 * tau_max;
  const int64_t first = (span / 2 + cfg.hop - 1) / cfg.hop;
  const int64_t last =
      (static_cast<int64_t>(n_samples) - span / 2) / cfg.hop - 1;
  return {first, last};
}

inline double cents(double f, double ref) { return 1200.0 * std::log2(f / ref); }

// Fraction of interior frames voiced and within `cent_tol` of truth.
inline double f0_accuracy_fraction(const hyface::dsp::Waveform& wav,
                                   const hyface::dsp::DspConfig& cfg,
                                   double true_f0, double cent_tol) {
  auto contour = hyface::dsp::extract_f0(wav, cfg);
  auto [first, last] = interior_f0_frames(cfg, wav.samples.size());
  int64_t good = 0, total = 0;
  for (int64_t t = first; t <= last; ++t) {
    ++total;
    if (contour.voiced[t] &&
        std::abs(cents(contour.values[t], true_f0)) <= cent_tol)
      ++good;
  }
  return total > 0 ? static_cast<double>(good) / total : 0.0;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<uint64_t> counter{0};
    auto base = std::filesystem::temp_directory_path();
    path_ = base / ("hyface_test_" + tag + "_" + std::to_string(::getpid()) +
                    "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing_util
