#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tunnel {

enum class ErrorCode {
  InvalidArgument,
  // potentials
  NonConvergence,
  DegenerateMinimum,
  EnergyAboveBarrier,
  EnergyNonPositive,
  // dynamics
  BlowUp,
  StepFailure,
  NoHeteroclinic,
  IrregularArrival,
  NoLibration,
  NonHyperbolic,
  NoCrossing,
  // wkb
  RiccatiBlowup,
  TailNotConverged,
  NoPlateau,
  MultipleCrossings,
  // modeltori
  ZeroTorus,
  InsideCaustic,
  NoInteriorMinimum,
  DegenerateCritical,
  // spectral
  BoxTooSmall,
  NoConvergence,
  LabelAmbiguity,
  WindowTooNarrow,
  // formulas
  TurningPointDegeneracy,
  EnergyOutOfRegime,
  NoBracket,
  AssumptionViolated,
  // cli
  ConfigError,
  CacheCorruption,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every numerical failure in the library is reported through this type; the
/// code identifies the failure class, the message carries the numbers.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tunnel
