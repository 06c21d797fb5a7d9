#include "morphquad/common.hpp"

#include <fmt/format.h>

namespace morphquad {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kSingularAllocation: return "SingularAllocation";
    case ErrorCode::kNonFiniteState: return "NonFiniteState";
    case ErrorCode::kEmptyCloud: return "EmptyCloud";
    case ErrorCode::kNoPath: return "NoPath";
    case ErrorCode::kOutOfBounds: return "OutOfBounds";
    case ErrorCode::kStartOccupied: return "StartOccupied";
    case ErrorCode::kGoalOccupied: return "GoalOccupied";
    case ErrorCode::kCorridorFailure: return "CorridorFailure";
    case ErrorCode::kDegenerateTime: return "DegenerateTime";
    case ErrorCode::kOutOfDomain: return "OutOfDomain";
    case ErrorCode::kSingularYaw: return "SingularYaw";
    case ErrorCode::kDegenerateThrust: return "DegenerateThrust";
    case ErrorCode::kMorphInfeasible: return "MorphInfeasible";
    case ErrorCode::kInfeasibleStart: return "InfeasibleStart";
    case ErrorCode::kDidNotConverge: return "DidNotConverge";
    case ErrorCode::kScenarioParse: return "ScenarioParse";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what, int index)
    : std::runtime_error(fmt::format("{}: {}", to_string(code), what)),
      code_(code),
      message_(what),
      index_(index) {}

}  // namespace morphquad
