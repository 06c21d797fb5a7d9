#include "morphquad/morphology.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace morphquad {

std::array<Vec2, 4> GeometryParams::hinges() const {
  if (hinge_offsets) return *hinge_offsets;
  std::array<Vec2, 4> out;
  for (int i = 0; i < 4; ++i) {
    out[i] = Vec2(kRotorSignX[i] * arm_length / 2.0, kRotorSignY[i] * arm_length / 2.0);
  }
  return out;
}

void GeometryParams::validate() const {
  auto require_positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument, fmt::format("{} must be positive, got {}", name, v));
    }
  };
  require_positive(arm_length, "arm_length");
  require_positive(body_length, "body_length");
  require_positive(body_mass, "body_mass");
  require_positive(arm_mass, "arm_mass");
  require_positive(body_half_height, "body_half_height");
  require_positive(torque_coeff, "torque_coeff");
  require_positive(thrust_coeff, "thrust_coeff");
  require_positive(max_rotor_thrust, "max_rotor_thrust");
  if (motor_mass_fraction < 0.0 || motor_mass_fraction > 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "motor_mass_fraction must lie in [0, 1]");
  }
}

GeometryParams GeometryParams::simulation_platform() { return GeometryParams{}; }

GeometryParams GeometryParams::flight_platform() {
  GeometryParams g;
  g.arm_length = 0.30;
  g.body_length = 0.18 * std::sqrt(2.0);
  g.body_mass = 0.85;
  g.arm_mass = 0.1;
  g.body_half_height = 0.05;
  return g;
}

std::optional<MorphPreset> parse_preset(std::string_view name) {
  if (name == "X" || name == "x") return MorphPreset::kX;
  if (name == "H" || name == "h") return MorphPreset::kH;
  if (name == "T" || name == "t") return MorphPreset::kT;
  if (name == "Y" || name == "y") return MorphPreset::kY;
  return std::nullopt;
}

MorphState MorphState::uniform(double angle) {
  MorphState m;
  m.alpha.fill(angle);
  m.clamp();
  return m;
}

MorphState MorphState::from_angles(const std::array<double, 4>& angles) {
  MorphState m;
  m.alpha = angles;
  m.clamp();
  return m;
}

MorphState MorphState::preset(MorphPreset p) {
  constexpr double q = kPi / 4;
  constexpr double h = kPi / 2;
  switch (p) {
    case MorphPreset::kX: return from_angles({q, q, q, q});
    case MorphPreset::kH: return from_angles({h, h, h, h});
    // Front arms spread sideways, rear arms folded back.
    case MorphPreset::kT: return from_angles({0.0, h, 0.0, h});
    // Front arms in a V, rear arms folded into a tail.
    case MorphPreset::kY: return from_angles({q, h, q, h});
  }
  return MorphState{};
}

void MorphState::clamp() {
  for (double& a : alpha) a = std::clamp(a, 0.0, kPi / 2);
}

std::array<Vec3, 4> motor_positions(const GeometryParams& geom, const MorphState& morph) {
  const auto hinge = geom.hinges();
  const double reach = geom.body_length / 2.0;
  std::array<Vec3, 4> out;
  for (int i = 0; i < 4; ++i) {
    const double a = morph.alpha[i];
    out[i] = Vec3(hinge[i].x() + kRotorSignX[i] * reach * std::sin(a),
                  hinge[i].y() + kRotorSignY[i] * reach * std::cos(a), geom.motor_height);
  }
  return out;
}

InertialProps inertial_props(const GeometryParams& geom, const MorphState& morph) {
  InertialProps props;
  props.motor_positions = motor_positions(geom, morph);
  const auto hinge = geom.hinges();

  const double motor_mass = geom.arm_mass * geom.motor_mass_fraction;
  const double rod_mass = geom.arm_mass - motor_mass;
  const double total = geom.total_mass();

  // Body: solid cuboid a x a x 2h about the geometric center.
  const double side = geom.arm_length;
  const double height = 2.0 * geom.body_half_height;
  Mat3 inertia = Mat3::Zero();
  inertia.diagonal() << geom.body_mass * (side * side + height * height) / 12.0,
      geom.body_mass * (side * side + height * height) / 12.0,
      geom.body_mass * (2.0 * side * side) / 12.0;

  Vec3 first_moment = Vec3::Zero();
  auto add_point = [&](double m, const Vec3& r) {
    inertia += m * (r.squaredNorm() * Mat3::Identity() - r * r.transpose());
    first_moment += m * r;
  };
  for (int i = 0; i < 4; ++i) {
    const Vec3 tip = props.motor_positions[i];
    const Vec3 base(hinge[i].x(), hinge[i].y(), geom.motor_height);
    add_point(rod_mass, 0.5 * (base + tip));
    add_point(motor_mass, tip);
  }

  props.cog_offset = first_moment / total;
  const Vec3& c = props.cog_offset;
  props.inertia = inertia - total * (c.squaredNorm() * Mat3::Identity() - c * c.transpose());
  props.inertia = 0.5 * (props.inertia + props.inertia.transpose()).eval();
  return props;
}

HalfExtents half_extents_at(const GeometryParams& geom, double alpha) {
  alpha = std::clamp(alpha, 0.0, kPi / 2);
  return {(geom.arm_length + geom.body_length * std::sin(alpha)) / 2.0,
          (geom.arm_length + geom.body_length * std::cos(alpha)) / 2.0, geom.body_half_height};
}

HalfExtents bounding_half_extents(const GeometryParams& geom, const MorphState& morph) {
  HalfExtents out{0.0, 0.0, geom.body_half_height};
  for (double a : morph.alpha) {
    const HalfExtents e = half_extents_at(geom, a);
    out.r = std::max(out.r, e.r);
    out.w = std::max(out.w, e.w);
  }
  return out;
}

std::optional<double> alpha_for_half_width(const GeometryParams& geom, double half_width) {
  if (half_extents_at(geom, kPi / 4).w <= half_width) return kPi / 4;
  const double c = (2.0 * half_width - geom.arm_length) / geom.body_length;
  if (c < 0.0) return std::nullopt;
  return std::acos(std::min(c, 1.0));
}

std::array<Vec3, 8> body_vertices(const HalfExtents& e) {
  std::array<Vec3, 8> v;
  int k = 0;
  for (double sx : {-1.0, 1.0}) {
    for (double sy : {-1.0, 1.0}) {
      for (double sz : {-1.0, 1.0}) v[k++] = Vec3(sx * e.r, sy * e.w, sz * e.h);
    }
  }
  return v;
}

std::array<Vec3, 8> body_vertices(const GeometryParams& geom, const MorphState& morph) {
  return body_vertices(bounding_half_extents(geom, morph));
}

Mat4 allocation_matrix(const GeometryParams& geom, const InertialProps& props) {
  const double k = geom.yaw_moment_ratio();
  const Vec3& c = props.cog_offset;
  Mat4 m;
  for (int i = 0; i < 4; ++i) {
    const Vec3& l = props.motor_positions[i];
    m(0, i) = 1.0;
    m(1, i) = l.y() - c.y();
    m(2, i) = c.x() - l.x();
    m(3, i) = kRotorSpin[i] * k;
  }
  const double scale = m.row(1).cwiseAbs().maxCoeff() * m.row(2).cwiseAbs().maxCoeff() * k;
  if (!(scale > 0.0) || std::abs(m.determinant()) < 1e-9 * scale) {
    throw Error(ErrorCode::kSingularAllocation,
                fmt::format("allocation determinant {:.3e} below tolerance", m.determinant()));
  }
  return m;
}

double thrust_efficiency(const MorphState& morph, double loss_at_fold) {
  double overlap = 0.0;
  for (double a : morph.alpha) {
    const double s = std::sin(2.0 * (a - kPi / 4));
    overlap += s * s;
  }
  return 1.0 - loss_at_fold * overlap / 4.0;
}

}  // namespace morphquad
