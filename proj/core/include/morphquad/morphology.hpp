#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "morphquad/common.hpp"

namespace morphquad {

/// Rotor numbering used throughout: 1 front-right, 2 rear-left,
/// 3 front-left, 4 rear-right (body frame x forward, y left, z up).
/// Rotors 1 and 2 share a spin direction, 3 and 4 the other.
inline constexpr std::array<double, 4> kRotorSignX{+1.0, -1.0, +1.0, -1.0};
inline constexpr std::array<double, 4> kRotorSignY{-1.0, +1.0, +1.0, -1.0};
inline constexpr std::array<double, 4> kRotorSpin{+1.0, +1.0, -1.0, -1.0};

/// Geometric and inertial parameters of the four-arm morphing frame.
///
/// The footprint half-extents follow
///   r = (arm_length + body_length * sin(alpha)) / 2   (body x)
///   w = (arm_length + body_length * cos(alpha)) / 2   (body y)
/// which is reproduced kinematically by hinges at (+-arm_length/2,
/// +-arm_length/2) carrying swing members of reach body_length/2. An arm at
/// alpha = 0 points sideways, at alpha = pi/2 it points fore/aft.
struct GeometryParams {
  double arm_length = 0.4;           // a [m]
  double body_length = 0.2828427125; // l [m]
  double body_mass = 1.0;            // [kg]
  double arm_mass = 0.125;           // per arm, motor included [kg]
  double motor_mass_fraction = 0.6;  // share of arm_mass lumped at the rotor
  double body_half_height = 0.05;    // h [m]
  double motor_height = 0.02;        // rotor plane above the body center [m]
  double torque_coeff = 1.6e-7;      // c_M [N m / (rad/s)^2]
  double thrust_coeff = 1.0e-5;      // c_T [N / (rad/s)^2]
  double max_rotor_thrust = 8.0;     // U_max [N]
  std::optional<std::array<Vec2, 4>> hinge_offsets;  // defaults to body corners

  [[nodiscard]] double total_mass() const { return body_mass + 4.0 * arm_mass; }
  [[nodiscard]] double yaw_moment_ratio() const { return torque_coeff / thrust_coeff; }
  [[nodiscard]] std::array<Vec2, 4> hinges() const;

  /// Throws kInvalidArgument on non-positive lengths/masses.
  void validate() const;

  /// 0.6 m wide in X, 0.4 m at full fold.
  static GeometryParams simulation_platform();
  /// 0.48 m wide in X, 0.30 m at full fold (37.5 % reduction).
  static GeometryParams flight_platform();
};

enum class MorphPreset { kX, kH, kT, kY };

[[nodiscard]] std::optional<MorphPreset> parse_preset(std::string_view name);

struct MorphState {
  std::array<double, 4> alpha{kPi / 4, kPi / 4, kPi / 4, kPi / 4};
  std::array<double, 4> alpha_dot{0.0, 0.0, 0.0, 0.0};

  /// All four arms at the same angle, clamped to [0, pi/2].
  static MorphState uniform(double angle);
  static MorphState preset(MorphPreset p);
  static MorphState from_angles(const std::array<double, 4>& angles);

  void clamp();
};

struct InertialProps {
  Mat3 inertia = Mat3::Identity();  // about the CoG, body axes
  Vec3 cog_offset = Vec3::Zero();   // CoG relative to the geometric center
  std::array<Vec3, 4> motor_positions{};  // relative to the geometric center
};

struct HalfExtents {
  double r = 0.0;  // body x
  double w = 0.0;  // body y
  double h = 0.0;  // body z

  [[nodiscard]] Vec3 as_vector() const { return {r, w, h}; }
};

[[nodiscard]] std::array<Vec3, 4> motor_positions(const GeometryParams& geom,
                                                  const MorphState& morph);

[[nodiscard]] InertialProps inertial_props(const GeometryParams& geom,
                                           const MorphState& morph);

/// Conservative box: per-axis maximum over the four arms.
[[nodiscard]] HalfExtents bounding_half_extents(const GeometryParams& geom,
                                                const MorphState& morph);

/// Extents for a single uniform arm angle.
[[nodiscard]] HalfExtents half_extents_at(const GeometryParams& geom, double alpha);

/// Smallest uniform arm angle in [pi/4, pi/2] whose half-width does not exceed
/// `half_width`. Empty when even the fully folded frame is too wide.
[[nodiscard]] std::optional<double> alpha_for_half_width(const GeometryParams& geom,
                                                         double half_width);

[[nodiscard]] std::array<Vec3, 8> body_vertices(const HalfExtents& extents);
[[nodiscard]] std::array<Vec3, 8> body_vertices(const GeometryParams& geom,
                                                const MorphState& morph);

/// Maps rotor thrusts U to [f, tau_x, tau_y, tau_z] about the CoG.
/// Throws kSingularAllocation when the matrix is numerically singular.
[[nodiscard]] Mat4 allocation_matrix(const GeometryParams& geom, const InertialProps& props);

/// Fraction of nominal thrust delivered in a given configuration; models the
/// propeller overlap loss that the controller estimates online.
[[nodiscard]] double thrust_efficiency(const MorphState& morph, double loss_at_fold);

}  // namespace morphquad
