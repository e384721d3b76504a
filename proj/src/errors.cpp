#include "tunnelsplit/errors.hpp"

namespace tunnel {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::DegenerateMinimum: return "DegenerateMinimum";
    case ErrorCode::EnergyAboveBarrier: return "EnergyAboveBarrier";
    case ErrorCode::EnergyNonPositive: return "EnergyNonPositive";
    case ErrorCode::BlowUp: return "BlowUp";
    case ErrorCode::StepFailure: return "StepFailure";
    case ErrorCode::NoHeteroclinic: return "NoHeteroclinic";
    case ErrorCode::IrregularArrival: return "IrregularArrival";
    case ErrorCode::NoLibration: return "NoLibration";
    case ErrorCode::NonHyperbolic: return "NonHyperbolic";
    case ErrorCode::NoCrossing: return "NoCrossing";
    case ErrorCode::RiccatiBlowup: return "RiccatiBlowup";
    case ErrorCode::TailNotConverged: return "TailNotConverged";
    case ErrorCode::NoPlateau: return "NoPlateau";
    case ErrorCode::MultipleCrossings: return "MultipleCrossings";
    case ErrorCode::ZeroTorus: return "ZeroTorus";
    case ErrorCode::InsideCaustic: return "InsideCaustic";
    case ErrorCode::NoInteriorMinimum: return "NoInteriorMinimum";
    case ErrorCode::DegenerateCritical: return "DegenerateCritical";
    case ErrorCode::BoxTooSmall: return "BoxTooSmall";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::LabelAmbiguity: return "LabelAmbiguity";
    case ErrorCode::WindowTooNarrow: return "WindowTooNarrow";
    case ErrorCode::TurningPointDegeneracy: return "TurningPointDegeneracy";
    case ErrorCode::EnergyOutOfRegime: return "EnergyOutOfRegime";
    case ErrorCode::NoBracket: return "NoBracket";
    case ErrorCode::AssumptionViolated: return "AssumptionViolated";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::CacheCorruption: return "CacheCorruption";
  }
  return "Unknown";
}

}  // namespace tunnel
