#include "morphquad/morph_schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace morphquad {

double smoothstep5(double s) {
  s = std::clamp(s, 0.0, 1.0);
  return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

double smoothstep5_rate(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  return 30.0 * s * s * (1.0 - s) * (1.0 - s);
}

void MorphProfile::add_ramp(double t0, double t1, const std::array<double, 4>& to) {
  if (!(t1 > t0)) throw Error(ErrorCode::kInvalidArgument, "morph ramp needs t1 > t0");
  if (!ramps_.empty() && t0 < ramps_.back().t1 - 1e-12) {
    throw Error(ErrorCode::kInvalidArgument, "morph ramps must not overlap");
  }
  MorphRamp r;
  r.t0 = t0;
  r.t1 = t1;
  r.from = ramps_.empty() ? initial_ : ramps_.back().to;
  r.to = to;
  ramps_.push_back(r);
}

MorphState MorphProfile::at(double t) const {
  MorphState m;
  m.alpha = initial_;
  m.alpha_dot.fill(0.0);
  for (const auto& r : ramps_) {
    if (t < r.t0) break;
    if (t >= r.t1) {
      m.alpha = r.to;
      continue;
    }
    const double span = r.t1 - r.t0;
    const double s = (t - r.t0) / span;
    const double blend = smoothstep5(s);
    const double rate = smoothstep5_rate(s) / span;
    for (int i = 0; i < 4; ++i) {
      m.alpha[i] = r.from[i] + (r.to[i] - r.from[i]) * blend;
      m.alpha_dot[i] = (r.to[i] - r.from[i]) * rate;
    }
    break;
  }
  return m;
}

double MorphProfile::peak_rate() const {
  double peak = 0.0;
  for (const auto& r : ramps_) {
    for (int i = 0; i < 4; ++i) {
      peak = std::max(peak, 1.875 * std::abs(r.to[i] - r.from[i]) / (r.t1 - r.t0));
    }
  }
  return peak;
}

HalfExtents MorphProfile::window_extents(const GeometryParams& geom, double t0, double t1) const {
  // Every arm moves monotonically inside a ramp, so extremes sit at the
  // window ends or at ramp boundaries.
  std::vector<double> times{t0, t1};
  for (const auto& r : ramps_) {
    if (r.t0 > t0 && r.t0 < t1) times.push_back(r.t0);
    if (r.t1 > t0 && r.t1 < t1) times.push_back(r.t1);
  }
  HalfExtents out{0.0, 0.0, geom.body_half_height};
  for (double t : times) {
    const HalfExtents e = bounding_half_extents(geom, at(t));
    out.r = std::max(out.r, e.r);
    out.w = std::max(out.w, e.w);
  }
  return out;
}

PolytopeClearance polytope_clearance(const Polytope& poly, double yaw) {
  const Vec3 lateral(-std::sin(yaw), std::cos(yaw), 0.0);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  double zlo = lo, zhi = hi;
  for (const Vec3& v : polytope_vertices(poly)) {
    lo = std::min(lo, lateral.dot(v));
    hi = std::max(hi, lateral.dot(v));
    zlo = std::min(zlo, v.z());
    zhi = std::max(zhi, v.z());
  }
  if (!(hi > lo) || !(zhi > zlo)) return {};
  return {0.5 * (hi - lo), 0.5 * (zhi - zlo)};
}

std::vector<double> polytope_alpha_targets(const Corridor& corridor, const GeometryParams& geom,
                                           double yaw, const MorphPolicy& policy) {
  const double x_alpha = kPi / 4;
  std::vector<double> out;
  for (std::size_t k = 0; k < corridor.polytopes.size(); ++k) {
    const auto c = polytope_clearance(corridor.polytopes[k], yaw);
    const int idx = static_cast<int>(k);
    if (c.vertical - policy.height_margin < geom.body_half_height) {
      throw Error(ErrorCode::kMorphInfeasible,
                  fmt::format("polytope {} is {:.3f} m tall, too low for the body", k,
                              2.0 * c.vertical),
                  idx);
    }
    const double room = c.lateral - policy.width_margin;
    if (!policy.enabled) {
      if (half_extents_at(geom, x_alpha).w > room) {
        throw Error(ErrorCode::kMorphInfeasible,
                    fmt::format("polytope {} is {:.3f} m wide and morphing is disabled", k,
                                2.0 * c.lateral),
                    idx);
      }
      out.push_back(x_alpha);
      continue;
    }
    const auto alpha = alpha_for_half_width(geom, room);
    if (!alpha) {
      throw Error(ErrorCode::kMorphInfeasible,
                  fmt::format("polytope {} is {:.3f} m wide, narrower than the folded frame", k,
                              2.0 * c.lateral),
                  idx);
    }
    out.push_back(*alpha);
  }
  return out;
}

MorphProfile schedule_morph(const std::vector<double>& piece_alpha,
                            const Eigen::VectorXd& durations, const MorphPolicy& policy) {
  const double x_alpha = kPi / 4;
  if (piece_alpha.size() != static_cast<std::size_t>(durations.size())) {
    throw Error(ErrorCode::kInvalidArgument, "one target angle per piece required");
  }
  auto ramp_time = [&](double delta) {
    return std::max(policy.ramp_duration, 1.875 * std::abs(delta) / policy.servo_slew);
  };

  struct Plateau {
    double start, end, level;
  };
  std::vector<Plateau> plateaus;
  double t = 0.0;
  for (std::size_t k = 0; k < piece_alpha.size(); ++k) {
    const double end = t + durations[static_cast<Eigen::Index>(k)];
    if (piece_alpha[k] > x_alpha + 1e-9) {
      const Plateau p{t - policy.settle_time, end + policy.settle_time, piece_alpha[k]};
      if (!plateaus.empty()) {
        Plateau& prev = plateaus.back();
        const double gap = p.start - prev.end;
        if (gap < ramp_time(prev.level - x_alpha) + ramp_time(p.level - x_alpha)) {
          prev.end = std::max(prev.end, p.end);
          prev.level = std::max(prev.level, p.level);
          t = end;
          continue;
        }
      }
      plateaus.push_back(p);
    }
    t = end;
  }

  const std::array<double, 4> open{x_alpha, x_alpha, x_alpha, x_alpha};
  if (plateaus.empty()) return MorphProfile(open);

  const double first_ramp = ramp_time(plateaus.front().level - x_alpha);
  const bool premorph = plateaus.front().start - first_ramp < 0.0;
  MorphProfile profile(premorph ? std::array<double, 4>{plateaus.front().level,
                                                        plateaus.front().level,
                                                        plateaus.front().level,
                                                        plateaus.front().level}
                                : open);
  for (std::size_t i = 0; i < plateaus.size(); ++i) {
    const Plateau& p = plateaus[i];
    const double d = ramp_time(p.level - x_alpha);
    const std::array<double, 4> folded{p.level, p.level, p.level, p.level};
    if (!(i == 0 && premorph)) profile.add_ramp(p.start - d, p.start, folded);
    // A vehicle that arrives folded stays folded: the goal polytope is narrow.
    if (i + 1 < plateaus.size() || piece_alpha.back() <= x_alpha + 1e-9) {
      profile.add_ramp(p.end, p.end + d, open);
    }
  }
  return profile;
}

std::vector<HalfExtents> piece_extents(const MorphProfile& profile,
                                       const Eigen::VectorXd& durations,
                                       const GeometryParams& geom) {
  std::vector<HalfExtents> out;
  double t = 0.0;
  for (Eigen::Index k = 0; k < durations.size(); ++k) {
    out.push_back(profile.window_extents(geom, t, t + durations[k]));
    t += durations[k];
  }
  return out;
}

}  // namespace morphquad
