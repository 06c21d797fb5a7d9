#pragma once

#include <array>
#include <vector>

#include "morphquad/corridor.hpp"
#include "morphquad/morphology.hpp"

namespace morphquad {

/// Quintic smoothstep 10s^3 - 15s^4 + 6s^5 and its derivative in s.
[[nodiscard]] double smoothstep5(double s);
[[nodiscard]] double smoothstep5_rate(double s);

/// Arm-angle transition between two configurations over [t0, t1].
struct MorphRamp {
  double t0 = 0.0;
  double t1 = 0.0;
  std::array<double, 4> from{};
  std::array<double, 4> to{};
};

/// Piecewise-constant arm angles joined by smooth ramps. Ramps are sorted
/// and must not overlap; angles hold outside them.
class MorphProfile {
 public:
  MorphProfile() : MorphProfile(MorphState::preset(MorphPreset::kX).alpha) {}
  explicit MorphProfile(const std::array<double, 4>& initial) : initial_(initial) {}

  /// Appends a ramp to `to` on [t0, t1]; starts from the current final angles.
  void add_ramp(double t0, double t1, const std::array<double, 4>& to);

  [[nodiscard]] MorphState at(double t) const;
  [[nodiscard]] const std::array<double, 4>& initial() const { return initial_; }
  [[nodiscard]] const std::vector<MorphRamp>& ramps() const { return ramps_; }
  [[nodiscard]] bool constant() const { return ramps_.empty(); }
  /// Largest |alpha_dot| over all ramps [rad/s].
  [[nodiscard]] double peak_rate() const;

  /// Conservative box for [t0, t1]: per-axis maximum over every angle the
  /// arms pass through in the window.
  [[nodiscard]] HalfExtents window_extents(const GeometryParams& geom, double t0,
                                           double t1) const;

 private:
  std::array<double, 4> initial_;
  std::vector<MorphRamp> ramps_;
};

struct MorphPolicy {
  bool enabled = true;
  /// Clearance kept between the body box and a polytope side [m].
  double width_margin = 0.01;
  double height_margin = 0.005;
  /// Lower bound on a ramp's duration [s]; slower servos stretch it.
  double ramp_duration = 0.5;
  /// Time between finishing a fold and entering the narrow polytope [s].
  double settle_time = 0.1;
  double servo_slew = 3.0;  // [rad/s]
};

/// Half-extent of a polytope along the yaw-frame lateral axis and along z.
struct PolytopeClearance {
  double lateral = 0.0;
  double vertical = 0.0;
};
[[nodiscard]] PolytopeClearance polytope_clearance(const Polytope& poly, double yaw);

/// Uniform arm angle each polytope needs. Wide polytopes get the X
/// configuration. Throws kMorphInfeasible (index = polytope) when even the
/// folded frame does not fit, or when morphing is disabled and the X frame
/// does not fit.
[[nodiscard]] std::vector<double> polytope_alpha_targets(const Corridor& corridor,
                                                         const GeometryParams& geom, double yaw,
                                                         const MorphPolicy& policy);

/// Smooth profile that holds each piece's target angle over the piece
/// window (plus the settle time on both sides). Neighbouring folded windows
/// closer than two ramps are merged at the larger angle. A fold needed at
/// t = 0 starts pre-morphed.
[[nodiscard]] MorphProfile schedule_morph(const std::vector<double>& piece_alpha,
                                          const Eigen::VectorXd& durations,
                                          const MorphPolicy& policy);

/// Per-piece conservative body boxes under `profile`.
[[nodiscard]] std::vector<HalfExtents> piece_extents(const MorphProfile& profile,
                                                     const Eigen::VectorXd& durations,
                                                     const GeometryParams& geom);

}  // namespace morphquad
