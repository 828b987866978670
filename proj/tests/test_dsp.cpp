// Copyright (c) 2026 hyface authors
// Licensed under the Apache License, Version 2.0

#include <algorithm>
#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "hyface/dsp/dsp.hpp"
#include "hyface/dsp/wav_io.hpp"

using namespace hyface;
using namespace hyface::dsp;
using namespace testing_util;

TEST_CASE("spectrogram frame count follows floor(len/hop)+1") {
  DspConfig cfg;
  auto wav = sine_wave(440.0, 1.0);
  REQUIRE(wav.samples.size() == 16000);
  auto [lin, mel] = compute_spectrograms(wav, cfg);
  CHECK(lin.n_frames() == 51);
  CHECK(mel.n_frames() == 51);
  CHECK(lin.n_bins() == 513);

  // spot-check a few other lengths against the formula
  for (size_t len : {16001, 16319, 16320, 20000}) {
    Waveform w;
    w.samples.assign(len, 0.1);
    auto s = stft_magnitude(w, cfg);
    CHECK(s.n_frames() == static_cast<int64_t>(len / 320) + 1);
  }
}

TEST_CASE("all-zero waveform gives mel frames at log(eps)") {
  DspConfig cfg;
  auto wav = silence(1.0);
  auto [lin, mel] = compute_spectrograms(wav, cfg);
  const double expected = std::log(kMelLogEps);
  for (double v : mel.frames.v) CHECK(v == expected);
  for (double v : lin.frames.v) CHECK(v == 0.0);
}

TEST_CASE("1 kHz sine peaks at the analytic FFT bin") {
  DspConfig cfg;
  auto wav = sine_wave(1000.0, 1.0);
  auto lin = stft_magnitude(wav, cfg);
  const int expected_bin =
      static_cast<int>(std::lround(1000.0 * cfg.n_fft / cfg.sample_rate));
  REQUIRE(expected_bin == 64);
  // interior frames: full window inside the signal
  const int64_t margin = cfg.win / 2 / cfg.hop + 1;
  for (int64_t t = margin; t < lin.n_frames() - margin; ++t) {
    const double* row = lin.frames.row(t);
    int arg =
        static_cast<int>(std::max_element(row, row + lin.n_bins()) - row);
    CHECK(arg == expected_bin);
  }
}

TEST_CASE("spectrograms reject bad input") {
  DspConfig cfg;
  Waveform wrong_rate = sine_wave(100.0, 1.0, 8000);
  CHECK_THROWS_MATCHES(stft_magnitude(wrong_rate, cfg), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == ErrorCode::SampleRateMismatch;
                       }));
  Waveform tiny;
  tiny.samples.assign(100, 0.0);
  CHECK_THROWS_MATCHES(stft_magnitude(tiny, cfg), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == ErrorCode::AudioTooShort;
                       }));
}

TEST_CASE("f0 extraction tracks a 220 Hz sine within 3 Hz") {
  DspConfig cfg;
  auto wav = sine_wave(220.0, 1.0);
  auto contour = extract_f0(wav, cfg);
  REQUIRE(contour.n_frames() == 51);
  auto [first, last] = interior_f0_frames(cfg, wav.samples.size());
  for (int64_t t = first; t <= last; ++t) {
    REQUIRE(contour.voiced[t]);
    CHECK(std::abs(contour.values[t] - 220.0) <= 3.0);
  }
}

TEST_CASE("digital silence is fully unvoiced") {
  DspConfig cfg;
  auto wav = silence(1.0);
  auto contour = extract_f0(wav, cfg);
  for (int64_t t = 0; t < contour.n_frames(); ++t) {
    CHECK(contour.voiced[t] == 0);
    CHECK(contour.values[t] == 0.0);
  }
}

TEST_CASE("100 Hz sawtooth: no octave error") {
  DspConfig cfg;
  auto wav = sawtooth_wave(100.0, 1.0);
  auto contour = extract_f0(wav, cfg);
  std::vector<double> voiced;
  auto [first, last] = interior_f0_frames(cfg, wav.samples.size());
  for (int64_t t = first; t <= last; ++t)
    if (contour.voiced[t]) voiced.push_back(contour.values[t]);
  REQUIRE(voiced.size() >= 10);
  std::sort(voiced.begin(), voiced.end());
  const double median = voiced[voiced.size() / 2];
  CHECK(std::abs(median - 100.0) <= 2.0);
}

TEST_CASE("f0 and spectrogram frame counts align for arbitrary lengths") {
  DspConfig cfg;
  Rng rng(7);
  for (int trial = 0; trial < 6; ++trial) {
    const auto len = static_cast<size_t>(16000 + rng.uniform_int(8000));
    Waveform w;
    w.sample_rate = 16000;
    w.samples.resize(len);
    for (auto& s : w.samples) s = 0.3 * rng.normal();
    auto lin = stft_magnitude(w, cfg);
    auto contour = extract_f0(w, cfg);
    CHECK(lin.n_frames() == contour.n_frames());
  }
}

TEST_CASE("f0 extractor meets the 20-cent bar on synthetic tones") {
  DspConfig cfg;
  // sines and sawtooths across the range, 30 dB SNR
  int idx = 0;
  for (double f0 : {80.0, 110.0, 196.0, 294.0, 400.0}) {
    auto sine = sine_wave(f0, 1.0);
    add_noise_snr(sine, 30.0, 100 + idx);
    CHECK(f0_accuracy_fraction(sine, cfg, f0, 20.0) >= 0.95);
    auto saw = sawtooth_wave(f0, 1.0);
    add_noise_snr(saw, 30.0, 200 + idx);
    CHECK(f0_accuracy_fraction(saw, cfg, f0, 20.0) >= 0.95);
    ++idx;
  }
}

TEST_CASE("dsp outputs are bit-deterministic") {
  DspConfig cfg;
  auto wav = sawtooth_wave(173.0, 1.2);
  add_noise_snr(wav, 25.0, 42);
  auto a = compute_spectrograms(wav, cfg);
  auto b = compute_spectrograms(wav, cfg);
  CHECK(a.first.frames.v == b.first.frames.v);
  CHECK(a.second.frames.v == b.second.frames.v);
  auto c1 = extract_f0(wav, cfg);
  auto c2 = extract_f0(wav, cfg);
  CHECK(c1.values == c2.values);
  CHECK(c1.voiced == c2.voiced);
}

TEST_CASE("speaker average F0 pools voiced frames") {
  SECTION("constant contour") {
    F0Contour c;
    c.values = {100.0, 100.0};
    c.voiced = {1, 1};
    auto avg = compute_speaker_avg_f0({c}, "spk");
    CHECK(avg.avg_f0 == 100.0);
    CHECK(avg.n_voiced_frames == 2);
  }
  SECTION("two contours pool to 150") {
    F0Contour a, b;
    a.values = {100.0, 100.0};
    a.voiced = {1, 1};
    b.values = {200.0, 200.0};
    b.voiced = {1, 1};
    CHECK(compute_speaker_avg_f0({a, b}).avg_f0 == 150.0);
  }
  SECTION("unvoiced frames are excluded") {
    F0Contour c;
    c.values = {100.0, 0.0, 200.0};
    c.voiced = {1, 0, 1};
    CHECK(compute_speaker_avg_f0({c}).avg_f0 == 150.0);
  }
  SECTION("no voiced frames anywhere") {
    F0Contour c;
    c.values = {0.0, 0.0};
    c.voiced = {0, 0};
    CHECK_THROWS_MATCHES(compute_speaker_avg_f0({c}, "mute"), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.code() == ErrorCode::NoVoicedFrames &&
                                  e.detail().find("mute") != std::string::npos;
                         }));
  }
}

TEST_CASE("pooled average equals voiced-frame-weighted mean of parts") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<F0Contour> parts;
    std::vector<F0Contour> merged(1);
    const int n_parts = 1 + static_cast<int>(rng.uniform_int(4));
    bool any_voiced = false;
    for (int p = 0; p < n_parts; ++p) {
      F0Contour c;
      const int n = 1 + static_cast<int>(rng.uniform_int(10));
      for (int i = 0; i < n; ++i) {
        const bool v = rng.uniform() < 0.7;
        const double hz = v ? rng.uniform(60.0, 400.0) : 0.0;
        c.values.push_back(hz);
        c.voiced.push_back(v);
        merged[0].values.push_back(hz);
        merged[0].voiced.push_back(v);
        any_voiced |= v;
      }
      parts.push_back(c);
    }
    if (!any_voiced) continue;
    auto pooled = compute_speaker_avg_f0(parts);
    auto brute = compute_speaker_avg_f0(merged);
    CHECK(pooled.avg_f0 == Catch::Approx(brute.avg_f0).epsilon(1e-12));
    CHECK(pooled.n_voiced_frames == brute.n_voiced_frames);
  }
}

TEST_CASE("f0_statistics uses the population standard deviation") {
  auto mk = [](double v) { return SpeakerAvgF0{"s", v, 10}; };
  {
    auto [mean, stdv] = f0_statistics({mk(100), mk(100), mk(100)});
    CHECK(mean == 100.0);
    CHECK(stdv == 0.0);
  }
  {
    auto [mean, stdv] = f0_statistics({mk(90), mk(110)});
    CHECK(mean == 100.0);
    CHECK(stdv == 10.0);
  }
  CHECK_THROWS_MATCHES(f0_statistics({}), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == ErrorCode::EmptyInput;
                       }));
}

TEST_CASE("wav round trip through PCM16 and float32") {
  TempDir dir("wav");
  auto wav = sine_wave(220.0, 0.25);

  auto f32 = dir.path() / "a.wav";
  write_wav_float32(f32, wav);
  auto back = read_wav(f32);
  REQUIRE(back.sample_rate == 16000);
  REQUIRE(back.samples.size() == wav.samples.size());
  for (size_t i = 0; i < wav.samples.size(); i += 997)
    CHECK(back.samples[i] ==
          Catch::Approx(wav.samples[i]).margin(1e-7));

  auto p16 = dir.path() / "b.wav";
  write_wav_pcm16(p16, wav);
  auto back16 = read_wav(p16);
  for (size_t i = 0; i < wav.samples.size(); i += 997)
    CHECK(back16.samples[i] == Catch::Approx(wav.samples[i]).margin(1e-4));
}

TEST_CASE("wav reader rejects unsupported layouts") {
  TempDir dir("badwav");
  auto path = dir.path() / "stereo.wav";
  // hand-rolled stereo PCM16 header
  {
    std::ofstream f(path, std::ios::binary);
    f.write("RIFF", 4);
    write_le<uint32_t>(f, 36 + 8);
    f.write("WAVE", 4);
    f.write("fmt ", 4);
    write_le<uint32_t>(f, 16);
    write_le<uint16_t>(f, 1);
    write_le<uint16_t>(f, 2);  // stereo
    write_le<uint32_t>(f, 16000);
    write_le<uint32_t>(f, 64000);
    write_le<uint16_t>(f, 4);
    write_le<uint16_t>(f, 16);
    f.write("data", 4);
    write_le<uint32_t>(f, 8);
    for (int i = 0; i < 4; ++i) write_le<int16_t>(f, 0);
  }
  CHECK_THROWS_MATCHES(read_wav(path), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == ErrorCode::DecodeError;
                       }));
}

TEST_CASE("spectral flatness separates noise from tones") {
  Rng rng(5);
  std::vector<double> noise(16000);
  for (auto& s : noise) s = 0.3 * rng.normal();
  CHECK(spectral_flatness(noise) > 0.5);

  auto tone = sine_wave(200.0, 1.0);
  CHECK(spectral_flatness(tone.samples) < 0.1);
}

TEST_CASE("dominant_frequency finds an FFT peak") {
  auto tone = sine_wave(200.0, 1.0);
  const double peak = dominant_frequency(tone.samples, 16000, 8192);
  CHECK(std::abs(peak - 200.0) <= 16000.0 / 8192);
}
