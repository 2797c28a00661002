#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace foodcal {

/// Every failure the pipeline can report. The names are part of the CLI and
/// report contract, see to_string().
enum class ErrorKind {
  MissingFile,
  ParseError,
  SchemaError,
  InvariantViolation,
  DecodeError,
  TooSmall,
  InvalidBox,
  MissingAnnotations,
  NoCoin,
  MultipleCoins,
  NoFood,
  TooManyFoods,
  DuplicateFoodLabels,
  LabelMismatch,
  BoxTooSmall,
  NoCircle,
  DegenerateColors,
  EmptyForeground,
  EmptyMask,
  DegenerateExtent,
  UnknownFood,
  NonpositiveVolume,
  EmptyInput,
  NoEvaluableRecords,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view name() const noexcept { return to_string(kind_); }

 private:
  ErrorKind kind_;
};

/// An Error tagged with the pipeline stage that raised it
/// ("detect", "calibrate", "segment", "measure", "nutrition", "ingest").
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.kind(), cause.what()), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace foodcal
