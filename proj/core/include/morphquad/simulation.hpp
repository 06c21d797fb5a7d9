#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "morphquad/controller.hpp"
#include "morphquad/corridor.hpp"

namespace morphquad {

/// Arm actuator: first-order lag from commanded to actual rate, then a slew
/// limit. Angles are held inside [0, pi/2].
struct ServoModel {
  double time_constant = 0.08;  // [s]
  double slew = 3.0;            // [rad/s]
};

/// Zero-mean Gaussian noise added to the state the controller sees.
struct NoiseModel {
  double position = 0.0;  // [m]
  double velocity = 0.0;  // [m/s]
  double attitude = 0.0;  // small-angle perturbation [rad]
  double rate = 0.0;      // [rad/s]

  [[nodiscard]] bool active() const {
    return position > 0.0 || velocity > 0.0 || attitude > 0.0 || rate > 0.0;
  }
};

struct SimConfig {
  double dt = 0.001;         // physics and control period [s]
  double duration = 10.0;    // [s]
  DragParams drag;
  /// Thrust lost to propeller overlap when all arms are folded.
  double thrust_loss_at_fold = 0.15;
  ServoModel servo;
  NoiseModel noise;
  std::uint64_t seed = 1;
  double gravity = kGravity;
};

struct TelemetryRow {
  double t = 0.0;
  RigidState state;
  std::array<double, 4> alpha{};
  double f = 0.0;  // commanded collective thrust [N]
  Vec3 tau = Vec3::Zero();
  std::array<double, 4> U{};
  double H = 1.0;
  Vec3 ref_p = Vec3::Zero();
  double err_norm = 0.0;
};

struct SimResult {
  std::vector<TelemetryRow> rows;
  double avg_error = 0.0;
  double max_error = 0.0;
  /// Worst body-vertex distance outside the corridor; 0 without a corridor.
  double max_violation = 0.0;
  double energy = 0.0;  // integral of delivered f^2 [N^2 s]
  bool diverged = false;
};

using ReferenceFn = std::function<ReferenceSample(double t)>;

/// Distance by which the worst body vertex lies outside the union of the
/// polytopes (negative when strictly inside).
[[nodiscard]] double corridor_violation(const std::vector<Polytope>& polytopes,
                                        const RigidState& state, const GeometryParams& geom,
                                        const MorphState& morph);

/// Initial state that matches the reference at t = 0.
[[nodiscard]] RigidState state_from_reference(const ReferenceSample& ref);

/// Closed-loop simulation with one row per control tick, duration/dt + 1 rows
/// in total. Statistics are taken over all rows. A non-finite state stops
/// the run and sets `diverged`.
[[nodiscard]] SimResult simulate(TrackingController& controller, const GeometryParams& geom,
                                 const RigidState& initial, const MorphState& initial_morph,
                                 const ReferenceFn& reference, const SimConfig& config,
                                 const std::vector<Polytope>* corridor = nullptr);

}  // namespace morphquad
