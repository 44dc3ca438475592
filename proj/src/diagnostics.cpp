#include "lurelab/diagnostics.hpp"
#include "lurelab/error.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace lurelab {

namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

WarningSink& sink_ref() {
  static WarningSink sink = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
  return sink;
}

}  // namespace

WarningSink set_warning_sink(WarningSink sink) {
  std::lock_guard<std::mutex> lock(sink_mutex());
  return std::exchange(sink_ref(), std::move(sink));
}

void warn(const std::string& message) {
  std::lock_guard<std::mutex> lock(sink_mutex());
  if (sink_ref()) sink_ref()(message);
}

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonSquare: return "NonSquare";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::Singular: return "Singular";
    case ErrorKind::QrFailure: return "QrFailure";
    case ErrorKind::NotHurwitz: return "NotHurwitz";
    case ErrorKind::NoStabilizingInit: return "NoStabilizingInit";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::PoleHit: return "PoleHit";
    case ErrorKind::ImproperTF: return "ImproperTF";
    case ErrorKind::NegativeDelay: return "NegativeDelay";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::WrongSpectrum: return "WrongSpectrum";
    case ErrorKind::NormalizationFailure: return "NormalizationFailure";
    case ErrorKind::NoRoot: return "NoRoot";
    case ErrorKind::DegenerateFlat: return "DegenerateFlat";
    case ErrorKind::StepUnderflow: return "StepUnderflow";
    case ErrorKind::NonFiniteState: return "NonFiniteState";
    case ErrorKind::RealizationMismatch: return "RealizationMismatch";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace lurelab
