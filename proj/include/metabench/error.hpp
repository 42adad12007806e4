#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace metabench {

enum class ErrorCode {
  MissingValue,
  NonPositiveIntensity,
  DuplicateSampleId,
  DuplicateFeature,
  BadLabel,
  BadFormat,
  SampleMismatch,
  InvalidSpec,
  EmptyTable,
  ShapeMismatch,
  TooFewPerClass,
  NonFinite,
  UnknownSolver,
  LengthMismatch,
  Empty,
  EmptyGrid,
  MissingCell,
  WrongFamily,
  Io,
  Config,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingValue: return "MissingValue";
    case ErrorCode::NonPositiveIntensity: return "NonPositiveIntensity";
    case ErrorCode::DuplicateSampleId: return "DuplicateSampleId";
    case ErrorCode::DuplicateFeature: return "DuplicateFeature";
    case ErrorCode::BadLabel: return "BadLabel";
    case ErrorCode::BadFormat: return "BadFormat";
    case ErrorCode::SampleMismatch: return "SampleMismatch";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::EmptyTable: return "EmptyTable";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::TooFewPerClass: return "TooFewPerClass";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::UnknownSolver: return "UnknownSolver";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::Empty: return "Empty";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::MissingCell: return "MissingCell";
    case ErrorCode::WrongFamily: return "WrongFamily";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

// All library failures are reported through this type; `code()` is stable,
// the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code), detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace metabench
