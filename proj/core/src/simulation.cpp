#include "morphquad/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace morphquad {

double corridor_violation(const std::vector<Polytope>& polytopes, const RigidState& state,
                          const GeometryParams& geom, const MorphState& morph) {
  if (polytopes.empty()) return 0.0;
  const Mat3 R = state.rotation();
  double worst = -std::numeric_limits<double>::infinity();
  for (const Vec3& v : body_vertices(geom, morph)) {
    const Vec3 x = state.p + R * v;
    double best = std::numeric_limits<double>::infinity();
    for (const Polytope& poly : polytopes) best = std::min(best, point_violation(poly, x));
    worst = std::max(worst, best);
  }
  return worst;
}

RigidState state_from_reference(const ReferenceSample& ref) {
  RigidState s;
  s.p = ref.flat.p;
  s.v = ref.flat.v;
  s.q = ref.attitude.q;
  s.omega = ref.attitude.omega;
  return s;
}

namespace {

class StateNoise {
 public:
  StateNoise(const NoiseModel& model, std::uint64_t seed) : model_(model), rng_(seed) {}

  RigidState apply(const RigidState& s) {
    if (!model_.active()) return s;
    RigidState out = s;
    out.p += draw(model_.position);
    out.v += draw(model_.velocity);
    const Vec3 dtheta = draw(model_.attitude);
    out.q = (s.q * Quat(1.0, 0.5 * dtheta.x(), 0.5 * dtheta.y(), 0.5 * dtheta.z())).normalized();
    out.omega += draw(model_.rate);
    return out;
  }

 private:
  Vec3 draw(double sigma) {
    Vec3 v;
    for (int i = 0; i < 3; ++i) v[i] = sigma * normal_(rng_);
    return v;
  }

  NoiseModel model_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace

SimResult simulate(TrackingController& controller, const GeometryParams& geom,
                   const RigidState& initial, const MorphState& initial_morph,
                   const ReferenceFn& reference, const SimConfig& config,
                   const std::vector<Polytope>* corridor) {
  if (!(config.dt > 0.0) || !(config.duration >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "simulation needs dt > 0 and duration >= 0");
  }
  const long steps = std::lround(config.duration / config.dt);
  StateNoise noise(config.noise, config.seed);

  PlantParams plant;
  plant.drag = config.drag;
  plant.mass = geom.total_mass();
  plant.gravity = config.gravity;

  SimResult out;
  out.rows.reserve(static_cast<std::size_t>(steps) + 1);
  RigidState s = initial;
  MorphState morph = initial_morph;
  std::array<double, 4> servo_rate = morph.alpha_dot;
  double accel_z = config.gravity;
  double err_sum = 0.0;
  out.max_violation = corridor && !corridor->empty()
                          ? -std::numeric_limits<double>::infinity()
                          : 0.0;

  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * config.dt;
    ControllerInput in;
    in.state = noise.apply(s);
    in.morph = morph;
    in.accel_z = accel_z;
    in.ref = reference(t);
    const ControlCommand cmd = controller.update(in);

    TelemetryRow row;
    row.t = t;
    row.state = s;
    row.alpha = morph.alpha;
    row.f = cmd.f;
    row.tau = cmd.tau;
    row.U = cmd.U;
    row.H = cmd.H;
    row.ref_p = in.ref.flat.p;
    row.err_norm = (s.p - in.ref.flat.p).norm();
    out.rows.push_back(row);
    err_sum += row.err_norm;
    out.max_error = std::max(out.max_error, row.err_norm);
    if (corridor && !corridor->empty()) {
      out.max_violation = std::max(out.max_violation, corridor_violation(*corridor, s, geom, morph));
    }
    if (k == steps) break;

    // Delivered wrench: saturated rotor thrusts scaled by the overlap loss.
    const InertialProps props = inertial_props(geom, morph);
    const double eff = thrust_efficiency(morph, config.thrust_loss_at_fold);
    Vec4 u;
    for (int i = 0; i < 4; ++i) u[i] = eff * std::clamp(cmd.U[i], 0.0, geom.max_rotor_thrust);
    const Vec4 wrench = allocation_matrix(geom, props) * u;
    WrenchInput w{wrench[0], wrench.tail<3>()};
    plant.props = props;
    out.energy += w.f * w.f * config.dt;

    try {
      s = rk4_step(s, w, plant, config.dt);
      const StateDerivative d = state_derivative(s, w, plant);
      accel_z = (s.rotation().transpose() * (d.v_dot + config.gravity * Vec3::UnitZ())).z();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNonFiniteState) throw;
      out.diverged = true;
      break;
    }
    if (!s.finite()) {
      out.diverged = true;
      break;
    }

    const double lag = config.dt / (config.servo.time_constant + config.dt);
    for (int i = 0; i < 4; ++i) {
      servo_rate[i] += lag * (cmd.servo_rate[i] - servo_rate[i]);
      servo_rate[i] = std::clamp(servo_rate[i], -config.servo.slew, config.servo.slew);
      double a = morph.alpha[i] + servo_rate[i] * config.dt;
      if (a <= 0.0 || a >= kPi / 2) {
        a = std::clamp(a, 0.0, kPi / 2);
        servo_rate[i] = 0.0;
      }
      morph.alpha[i] = a;
      morph.alpha_dot[i] = servo_rate[i];
    }
  }
  out.avg_error = out.rows.empty() ? 0.0 : err_sum / static_cast<double>(out.rows.size());
  return out;
}

}  // namespace morphquad
