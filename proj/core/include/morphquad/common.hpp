#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace morphquad {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Quat = Eigen::Quaterniond;

inline constexpr double kGravity = 9.81;
inline constexpr double kPi = 3.14159265358979323846;

enum class ErrorCode {
  kInvalidArgument,
  kSingularAllocation,
  kNonFiniteState,
  kEmptyCloud,
  kNoPath,
  kOutOfBounds,
  kStartOccupied,
  kGoalOccupied,
  kCorridorFailure,
  kDegenerateTime,
  kOutOfDomain,
  kSingularYaw,
  kDegenerateThrust,
  kMorphInfeasible,
  kInfeasibleStart,
  kDidNotConverge,
  kScenarioParse,
  kIo,
};

[[nodiscard]] std::string_view to_string(ErrorCode code);

/// Library-wide exception. `index()` carries the failing segment, polytope
/// or line number when the error has one, otherwise -1.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, int index = -1);

  [[nodiscard]] ErrorCode code() const { return code_; }
  [[nodiscard]] int index() const { return index_; }
  /// The message without the error code prefix.
  [[nodiscard]] const std::string& message() const { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
  int index_;
};

/// Skew-symmetric matrix such that hat(a) * b == a.cross(b).
[[nodiscard]] inline Mat3 hat(const Vec3& a) {
  Mat3 m;
  m << 0.0, -a.z(), a.y(),
       a.z(), 0.0, -a.x(),
      -a.y(), a.x(), 0.0;
  return m;
}

[[nodiscard]] inline bool all_finite(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  return m.allFinite();
}

}  // namespace morphquad
