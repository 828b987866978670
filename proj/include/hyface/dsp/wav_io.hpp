// Copyright (c) 2026 hyface authors
// Licensed under the Apache License, Version 2.0
//
// WAV reader/writer. Accepts mono PCM16 or IEEE float32; everything else is
// a typed DecodeError. Output is written as float32 (format 3).

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "hyface/core/error.hpp"
#include "hyface/core/io.hpp"
#include "hyface/dsp/types.hpp"

namespace hyface::dsp {

namespace wav_detail {

struct ChunkHeader {
  char id[4];
  uint32_t size;
};

inline ChunkHeader read_chunk_header(std::istream& is) {
  ChunkHeader h{};
  is.read(h.id, 4);
  h.size = read_le<uint32_t>(is);
  return h;
}

}  // namespace wav_detail

inline Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f)
    fail(ErrorCode::DecodeError, "audio_dsp", "cannot open " + path.string());

  char riff[4], wave[4];
  f.read(riff, 4);
  read_le<uint32_t>(f);
  f.read(wave, 4);
  if (!f || std::string(riff, 4) != "RIFF" || std::string(wave, 4) != "WAVE")
    fail(ErrorCode::DecodeError, "audio_dsp", path.string() + ": not a RIFF/WAVE file");

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t sample_rate = 0;
  bool have_fmt = false;
  std::vector<char> data;

  while (f && f.peek() != EOF) {
    auto chunk = wav_detail::read_chunk_header(f);
    if (!f) break;
    std::string id(chunk.id, 4);
    if (id == "fmt ") {
      format = read_le<uint16_t>(f);
      channels = read_le<uint16_t>(f);
      sample_rate = read_le<uint32_t>(f);
      read_le<uint32_t>(f);  // byte rate
      read_le<uint16_t>(f);  // block align
      bits = read_le<uint16_t>(f);
      if (chunk.size > 16) f.seekg(chunk.size - 16, std::ios::cur);
      have_fmt = true;
    } else if (id == "data") {
      data.resize(chunk.size);
      f.read(data.data(), chunk.size);
      if (!f)
        fail(ErrorCode::DecodeError, "audio_dsp", path.string() + ": truncated data chunk");
    } else {
      f.seekg(chunk.size + (chunk.size & 1), std::ios::cur);
    }
  }
  if (!have_fmt || data.empty())
    fail(ErrorCode::DecodeError, "audio_dsp", path.string() + ": missing fmt or data chunk");
  if (channels != 1)
    fail(ErrorCode::DecodeError, "audio_dsp",
         path.string() + ": expected mono, got " + std::to_string(channels) + " channels");

  Waveform wav;
  wav.sample_rate = static_cast<int>(sample_rate);
  if (format == 1 && bits == 16) {
    const size_t n = data.size() / 2;
    wav.samples.resize(n);
    const auto* p = reinterpret_cast<const int16_t*>(data.data());
    for (size_t i = 0; i < n; ++i) wav.samples[i] = p[i] / 32768.0;
  } else if (format == 3 && bits == 32) {
    const size_t n = data.size() / 4;
    wav.samples.resize(n);
    const auto* p = reinterpret_cast<const float*>(data.data());
    for (size_t i = 0; i < n; ++i) wav.samples[i] = static_cast<double>(p[i]);
  } else {
    fail(ErrorCode::DecodeError, "audio_dsp",
         path.string() + ": unsupported layout (format=" + std::to_string(format) +
             ", bits=" + std::to_string(bits) + "); expected PCM16 or float32");
  }
  check_finite(wav, path.string().c_str());
  return wav;
}

inline void write_wav_float32(const std::filesystem::path& path, const Waveform& wav) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorCode::IoError, "audio_dsp", "cannot write " + path.string());
  const uint32_t data_size = static_cast<uint32_t>(wav.samples.size() * 4);
  f.write("RIFF", 4);
  write_le<uint32_t>(f, 36 + data_size);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  write_le<uint32_t>(f, 16);
  write_le<uint16_t>(f, 3);  // IEEE float
  write_le<uint16_t>(f, 1);  // mono
  write_le<uint32_t>(f, static_cast<uint32_t>(wav.sample_rate));
  write_le<uint32_t>(f, static_cast<uint32_t>(wav.sample_rate * 4));
  write_le<uint16_t>(f, 4);
  write_le<uint16_t>(f, 32);
  f.write("data", 4);
  write_le<uint32_t>(f, data_size);
  for (double s : wav.samples) write_le<float>(f, static_cast<float>(s));
}

inline void write_wav_pcm16(const std::filesystem::path& path, const Waveform& wav) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorCode::IoError, "audio_dsp", "cannot write " + path.string());
  const uint32_t data_size = static_cast<uint32_t>(wav.samples.size() * 2);
  f.write("RIFF", 4);
  write_le<uint32_t>(f, 36 + data_size);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  write_le<uint32_t>(f, 16);
  write_le<uint16_t>(f, 1);
  write_le<uint16_t>(f, 1);
  write_le<uint32_t>(f, static_cast<uint32_t>(wav.sample_rate));
  write_le<uint32_t>(f, static_cast<uint32_t>(wav.sample_rate * 2));
  write_le<uint16_t>(f, 2);
  write_le<uint16_t>(f, 16);
  f.write("data", 4);
  write_le<uint32_t>(f, data_size);
  for (double s : wav.samples) {
    double clamped = std::max(-1.0, std::min(1.0, s));
    write_le<int16_t>(f, static_cast<int16_t>(std::lrint(clamped * 32767.0)));
  }
}

}  // namespace hyface::dsp
