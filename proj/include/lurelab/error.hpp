#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lurelab {

enum class ErrorKind {
  NonSquare,
  DimensionMismatch,
  NonFinite,
  Singular,
  QrFailure,
  NotHurwitz,
  NoStabilizingInit,
  NotConverged,
  PoleHit,
  ImproperTF,
  NegativeDelay,
  InvalidArgument,
  WrongSpectrum,
  NormalizationFailure,
  NoRoot,
  DegenerateFlat,
  StepUnderflow,
  NonFiniteState,
  RealizationMismatch,
  ParseError,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace lurelab
