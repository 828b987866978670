// Copyright (c) 2026 hyface authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hyface {

// Every failure surfaced by the library carries one of these codes so that
// callers (and the CLI error renderer) can branch without string matching.
enum class ErrorCode {
  SampleRateMismatch,
  AudioTooShort,
  NoVoicedFrames,
  EmptyInput,
  MissingSplit,
  EmptyCorpus,
  DecodeError,
  ProviderUnavailable,
  FrameMismatch,
  ParseError,
  ShapeMismatch,
  StructureMismatch,
  BadImageShape,
  NonFiniteLoss,
  ResumeMismatch,
  ConfigMismatch,
  ConfigParse,
  UnknownSpeaker,
  DimMismatch,
  ZeroNorm,
  InsufficientEmbeddings,
  InsufficientSpeakers,
  MissingGroundTruth,
  LengthMismatch,
  DegenerateVariance,
  MissingSet,
  IoError,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::SampleRateMismatch: return "SampleRateMismatch";
    case ErrorCode::AudioTooShort: return "AudioTooShort";
    case ErrorCode::NoVoicedFrames: return "NoVoicedFrames";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::MissingSplit: return "MissingSplit";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::DecodeError: return "DecodeError";
    case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::FrameMismatch: return "FrameMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::StructureMismatch: return "StructureMismatch";
    case ErrorCode::BadImageShape: return "BadImageShape";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::ResumeMismatch: return "ResumeMismatch";
    case ErrorCode::ConfigMismatch: return "ConfigMismatch";
    case ErrorCode::ConfigParse: return "ConfigParse";
    case ErrorCode::UnknownSpeaker: return "UnknownSpeaker";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::ZeroNorm: return "ZeroNorm";
    case ErrorCode::InsufficientEmbeddings: return "InsufficientEmbeddings";
    case ErrorCode::InsufficientSpeakers: return "InsufficientSpeakers";
    case ErrorCode::MissingGroundTruth: return "MissingGroundTruth";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::MissingSet: return "MissingSet";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string module, std::string message)
      : std::runtime_error(std::string(to_string(code)) + " [" + module +
                           "]: " + message),
        code_(code),
        module_(std::move(module)),
        detail_(std::move(message)) {}

  ErrorCode code() const { return code_; }
  const std::string& module_name() const { return module_; }
  const std::string& detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string module_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorCode code, std::string_view module,
                              std::string_view message) {
  throw Error(code, std::string(module), std::string(message));
}

inline void require(bool cond, ErrorCode code, std::string_view module,
                    std::string_view message) {
  if (!cond) fail(code, module, message);
}

}  // namespace hyface
