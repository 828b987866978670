// Copyright (c) 2026 hyface authors
// Licensed under the Apache License, Version 2.0
//
// Frame-aligned linguistic content embeddings. Two providers share one
// interface: a deterministic built-in fallback (normalized cepstra behind a
// frozen orthogonal projection) and ingestion of externally computed SSL
// features from disk.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "hyface/core/io.hpp"
#include "hyface/core/matrix.hpp"
#include "hyface/core/rng.hpp"
#include "hyface/dsp/dsp.hpp"

namespace hyface::content {

struct ContentEmbedding {
  Matrix frames;  // [n_frames x content_dim]
  int content_dim = 0;
  std::string provider_id;
  bool length_adjusted = false;  // true when frame-count reconciliation ran

  int64_t n_frames() const { return frames.rows; }
};

class ContentProvider {
 public:
  virtual ~ContentProvider() = default;
  virtual ContentEmbedding embed(const dsp::Waveform& wav,
                                 const std::string& utt_id) = 0;
  virtual int dim() const = 0;
  virtual std::string id() const = 0;
};

// ---------------------------------------------------------------------------
// precomputed-feature file format: 8-byte header (u16 magic 'CF', u16
// version, u16 n_frames, u16 dim, little-endian) + float32 row-major data.

inline constexpr uint16_t kContentFileMagic = 0x4643;  // "CF"
inline constexpr uint16_t kContentFileVersion = 1;

inline void write_content_file(const std::filesystem::path& path,
                               const Matrix& frames) {
  require(frames.rows <= 0xffff && frames.cols <= 0xffff, ErrorCode::IoError,
          "content_provider", "feature matrix too large for the file format");
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorCode::IoError, "content_provider", "cannot write " + path.string());
  write_le<uint16_t>(f, kContentFileMagic);
  write_le<uint16_t>(f, kContentFileVersion);
  write_le<uint16_t>(f, static_cast<uint16_t>(frames.rows));
  write_le<uint16_t>(f, static_cast<uint16_t>(frames.cols));
  for (double v : frames.v) write_le<float>(f, static_cast<float>(v));
}

inline Matrix read_content_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f)
    fail(ErrorCode::ProviderUnavailable, "content_provider",
         "missing feature file " + path.string());
  const auto magic = read_le<uint16_t>(f);
  if (magic != kContentFileMagic)
    fail(ErrorCode::ParseError, "content_provider",
         path.string() + ": bad magic");
  const auto version = read_le<uint16_t>(f);
  if (version != kContentFileVersion)
    fail(ErrorCode::ParseError, "content_provider",
         path.string() + ": unsupported version " + std::to_string(version));
  const auto n_frames = read_le<uint16_t>(f);
  const auto dim = read_le<uint16_t>(f);
  Matrix m(n_frames, dim);
  for (auto& v : m.v) v = static_cast<double>(read_le<float>(f));
  return m;
}

/// Load a precomputed feature file and reconcile its frame count against the
/// DSP frame count of the source utterance. Off-by-<=2 is repaired by
/// nearest-frame resampling (flagged); larger gaps are an error.
inline ContentEmbedding load_precomputed(const std::filesystem::path& path,
                                         int64_t expected_frames) {
  Matrix m = read_content_file(path);
  ContentEmbedding emb;
  emb.content_dim = static_cast<int>(m.cols);
  emb.provider_id = "file";
  if (m.rows == expected_frames) {
    emb.frames = std::move(m);
    return emb;
  }
  if (std::abs(m.rows - expected_frames) > 2)
    fail(ErrorCode::FrameMismatch, "content_provider",
         path.string() + ": got " + std::to_string(m.rows) + " frames, expected " +
             std::to_string(expected_frames));
  Matrix out(expected_frames, m.cols);
  for (int64_t t = 0; t < expected_frames; ++t) {
    int64_t src = expected_frames > 1
                      ? std::llround(static_cast<double>(t) * (m.rows - 1) /
                                     (expected_frames - 1))
                      : 0;
    src = std::min(src, m.rows - 1);
    std::copy_n(m.row(src), m.cols, out.row(t));
  }
  emb.frames = std::move(out);
  emb.length_adjusted = true;
  return emb;
}

// ---------------------------------------------------------------------------

/// Built-in fallback: 13 cepstra + deltas from the log-mel, per-utterance
/// mean/variance normalized, then a frozen semi-orthogonal projection to
/// content_dim. Per-utterance normalization strips global gain, so the
/// embedding is approximately speaker-gain free.
class ToyContentProvider : public ContentProvider {
 public:
  static constexpr int kCepstra = 13;

  explicit ToyContentProvider(dsp::DspConfig cfg, int content_dim = 64,
                              std::string provider_id = "toy-v1")
      : cfg_(cfg), content_dim_(content_dim), provider_id_(std::move(provider_id)) {
    build_projection();
  }

  int dim() const override { return content_dim_; }
  std::string id() const override { return provider_id_; }

  ContentEmbedding embed(const dsp::Waveform& wav, const std::string&) override {
    auto [lin, mel] = dsp::compute_spectrograms(wav, cfg_);
    return embed_mel(mel);
  }

  ContentEmbedding embed_mel(const dsp::MelSpectrogram& mel) const {
    const int64_t T = mel.n_frames();
    const int M = cfg_.n_mels;
    const int F = 2 * kCepstra;

    // DCT-II cepstra
    Matrix cep(T, kCepstra);
    for (int64_t t = 0; t < T; ++t) {
      const double* row = mel.frames.row(t);
      for (int k = 0; k < kCepstra; ++k) {
        double acc = 0.0;
        for (int m = 0; m < M; ++m)
          acc += row[m] * std::cos(dsp::kPi * k * (m + 0.5) / M);
        cep.at(t, k) = acc;
      }
    }
    // central-difference deltas, edges replicated
    Matrix feats(T, F);
    for (int64_t t = 0; t < T; ++t) {
      const int64_t tp = std::min<int64_t>(t + 1, T - 1);
      const int64_t tm = std::max<int64_t>(t - 1, 0);
      for (int k = 0; k < kCepstra; ++k) {
        feats.at(t, k) = cep.at(t, k);
        feats.at(t, kCepstra + k) = 0.5 * (cep.at(tp, k) - cep.at(tm, k));
      }
    }
    // per-utterance z-norm per dimension
    for (int k = 0; k < F; ++k) {
      double mean = 0.0;
      for (int64_t t = 0; t < T; ++t) mean += feats.at(t, k);
      mean /= static_cast<double>(T);
      double var = 0.0;
      for (int64_t t = 0; t < T; ++t) {
        const double d = feats.at(t, k) - mean;
        var += d * d;
      }
      var /= static_cast<double>(T);
      const double inv = 1.0 / std::sqrt(var + 1e-8);
      for (int64_t t = 0; t < T; ++t)
        feats.at(t, k) = (feats.at(t, k) - mean) * inv;
    }
    // frozen projection [F -> content_dim]
    ContentEmbedding emb;
    emb.content_dim = content_dim_;
    emb.provider_id = provider_id_;
    emb.frames = Matrix(T, content_dim_);
    for (int64_t t = 0; t < T; ++t)
      for (int c = 0; c < content_dim_; ++c) {
        double acc = 0.0;
        for (int k = 0; k < F; ++k) acc += feats.at(t, k) * proj_.at(k, c);
        emb.frames.at(t, c) = acc;
      }
    return emb;
  }

  const dsp::DspConfig& dsp_config() const { return cfg_; }

 private:
  void build_projection() {
    const int F = 2 * kCepstra;
    Rng rng(derive_seed(0x746f79, provider_id_));
    Eigen::MatrixXd g(content_dim_, F);
    for (int r = 0; r < content_dim_; ++r)
      for (int c = 0; c < F; ++c) g(r, c) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q =
        qr.householderQ() * Eigen::MatrixXd::Identity(content_dim_, F);
    proj_ = Matrix(F, content_dim_);
    for (int k = 0; k < F; ++k)
      for (int c = 0; c < content_dim_; ++c) proj_.at(k, c) = q(c, k);
  }

  dsp::DspConfig cfg_;
  int content_dim_;
  std::string provider_id_;
  Matrix proj_;  // [2*kCepstra x content_dim], orthonormal rows of q
};

/// File-backed provider: looks up <dir>/<utt_id>.cve, reconciles frame
/// counts, and projects to content_dim when the stored dimension differs
/// (projection frozen by provider id, declared in the embedding).
class FileContentProvider : public ContentProvider {
 public:
  FileContentProvider(std::filesystem::path dir, dsp::DspConfig cfg,
                      int content_dim = 256)
      : dir_(std::move(dir)), cfg_(cfg), content_dim_(content_dim) {}

  int dim() const override { return content_dim_; }
  std::string id() const override { return "file:" + dir_.string(); }

  ContentEmbedding embed(const dsp::Waveform& wav,
                         const std::string& utt_id) override {
    const auto path = dir_ / (utt_id + ".cve");
    const int64_t expected = cfg_.n_frames(wav.samples.size());
    ContentEmbedding emb = load_precomputed(path, expected);
    if (emb.content_dim != content_dim_) emb = project(std::move(emb));
    emb.provider_id = id();
    return emb;
  }

 private:
  ContentEmbedding project(ContentEmbedding in) {
    const int F = in.content_dim;
    auto key = std::to_string(F) + "->" + std::to_string(content_dim_);
    if (proj_.empty() || proj_key_ != key) {
      Rng rng(derive_seed(0x66696c65, key));
      proj_ = Matrix(F, content_dim_);
      const double scale = 1.0 / std::sqrt(static_cast<double>(F));
      for (auto& v : proj_.v) v = scale * rng.normal();
      proj_key_ = key;
    }
    ContentEmbedding out;
    out.content_dim = content_dim_;
    out.length_adjusted = in.length_adjusted;
    out.provider_id = in.provider_id + "#proj" + key;
    out.frames = Matrix(in.n_frames(), content_dim_);
    for (int64_t t = 0; t < in.n_frames(); ++t)
      for (int c = 0; c < content_dim_; ++c) {
        double acc = 0.0;
        for (int k = 0; k < F; ++k) acc += in.frames.at(t, k) * proj_.at(k, c);
        out.frames.at(t, c) = acc;
      }
    return out;
  }

  std::filesystem::path dir_;
  dsp::DspConfig cfg_;
  int content_dim_;
  Matrix proj_;
  std::string proj_key_;
};

inline std::unique_ptr<ContentProvider> make_content_provider(
    const std::string& spec_str, const dsp::DspConfig& cfg, int toy_dim = 64,
    int file_dim = 256) {
  if (spec_str == "toy" || spec_str.empty())
    return std::make_unique<ToyContentProvider>(cfg, toy_dim);
  if (spec_str.rfind("file:", 0) == 0)
    return std::make_unique<FileContentProvider>(spec_str.substr(5), cfg, file_dim);
  fail(ErrorCode::ConfigParse, "content_provider",
       "unknown content provider '" + spec_str + "' (expected toy or file:<dir>)");
}

}  // namespace hyface::content
