// Independent reference implementations shared by the unit tests and the
// acceptance runner.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <vector>

#include "morphquad/controller.hpp"
#include "morphquad/gridworld.hpp"
#include "morphquad/optimizer.hpp"

namespace oracle {

namespace mq = morphquad;

/// d^order/dt^order of t^power.
inline double mono(double t, int power, int order) {
  if (power < order) return 0.0;
  double c = 1.0;
  for (int k = 0; k < order; ++k) c *= power - k;
  return c * std::pow(t, power - order);
}

// Plain Dijkstra over the same 26-connected move set: a move is legal when
// every cell of the box it spans is free.
inline double dijkstra_cost(const mq::VoxelGrid& g, const mq::GridIndex& s,
                            const mq::GridIndex& t) {
  const auto dims = g.dims();
  auto free = [&](int x, int y, int z) {
    return x >= 0 && y >= 0 && z >= 0 && x < dims.x() && y < dims.y() && z < dims.z() &&
           !g.blocked({x, y, z});
  };
  std::vector<double> dist(g.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[g.linear(s)] = 0.0;
  pq.push({0.0, g.linear(s)});
  while (!pq.empty()) {
    auto [d, n] = pq.top();
    pq.pop();
    if (d > dist[n]) continue;
    const mq::GridIndex c = g.from_linear(n);
    if (c == t) return d;
    for (int dz = -1; dz <= 1; ++dz) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (!dx && !dy && !dz) continue;
          bool ok = true;
          for (int z = std::min(0, dz); z <= std::max(0, dz); ++z)
            for (int y = std::min(0, dy); y <= std::max(0, dy); ++y)
              for (int x = std::min(0, dx); x <= std::max(0, dx); ++x)
                ok = ok && free(c.x + x, c.y + y, c.z + z);
          if (!ok) continue;
          const mq::GridIndex nb{c.x + dx, c.y + dy, c.z + dz};
          const double nd = d + g.resolution() * std::sqrt(double(dx * dx + dy * dy + dz * dz));
          if (nd < dist[g.linear(nb)]) {
            dist[g.linear(nb)] = nd;
            pq.push({nd, g.linear(nb)});
          }
        }
      }
    }
  }
  return std::numeric_limits<double>::infinity();
}

inline mq::VoxelGrid random_grid(std::mt19937_64& rng, double density) {
  mq::VoxelGrid g(mq::Vec3::Zero(), 1.0, Eigen::Vector3i(20, 20, 20));
  std::bernoulli_distribution occ(density);
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (occ(rng)) g.set_occupied(g.from_linear(n));
  }
  g.inflate(0.0);
  return g;
}

inline mq::GridIndex random_free(std::mt19937_64& rng, const mq::VoxelGrid& g) {
  std::uniform_int_distribution<int> d(0, 19);
  for (;;) {
    mq::GridIndex i{d(rng), d(rng), d(rng)};
    if (!g.blocked(i)) return i;
  }
}

// Three boxes along x that narrow in the middle, so every penalty is active
// somewhere for a slow speed limit.
inline mq::PlanProblem random_problem(std::mt19937_64& rng, mq::OptimizerWeights& w) {
  using mq::Vec3;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  mq::PlanProblem pb;
  const double half = 0.25 + 0.05 * u(rng);
  pb.polytopes = {mq::Polytope::box(Vec3(-0.5, -1, 0), Vec3(1.2, 1, 2)),
                  mq::Polytope::box(Vec3(0.8, -half, 1 - half), Vec3(2.2, half, 1 + half)),
                  mq::Polytope::box(Vec3(1.8, -1, 0), Vec3(3.5, 1, 2))};
  pb.piece_polytope = {0, 1, 2};
  pb.start = mq::BoundaryState::rest(Vec3(0.0, 0.2 * u(rng), 1.0 + 0.2 * u(rng)));
  pb.goal = mq::BoundaryState::rest(Vec3(3.0, 0.2 * u(rng), 1.0 + 0.2 * u(rng)));
  pb.yaw = 0.3 * u(rng);
  pb.drag.rotor_drag = Vec3(0.3, 0.3, 0.1);
  pb.geom = mq::GeometryParams::simulation_platform();
  const auto x = mq::half_extents_at(pb.geom, mq::kPi / 4);
  const auto h = mq::half_extents_at(pb.geom, mq::kPi / 2);
  pb.piece_extents = {x, h, x};
  pb.initial_q.resize(3, 2);
  pb.initial_q.col(0) = Vec3(1.0 + 0.1 * u(rng), 0.3 * u(rng), 1.0 + 0.3 * u(rng));
  pb.initial_q.col(1) = Vec3(2.0 + 0.1 * u(rng), 0.3 * u(rng), 1.0 + 0.3 * u(rng));
  pb.initial_T = Eigen::Vector3d(0.6 + 0.2 * u(rng), 0.6 + 0.2 * u(rng), 0.6 + 0.2 * u(rng));
  w.v_max = 0.8;
  w.omega_max = 1.0;
  return pb;
}

struct Audit {
  double worst = 0.0;  // worst componentwise relative error
  bool penalties_active = false;
};

/// Analytic gradient against central differences in every q and tau
/// direction. Components below 1e-6 of the largest use that as the scale.
inline Audit audit_gradient(const mq::PlanProblem& pb, const mq::OptimizerWeights& w) {
  const Eigen::Matrix3Xd q = pb.initial_q;
  const Eigen::VectorXd tau = pb.initial_T.array().log();
  Eigen::Matrix3Xd gq;
  Eigen::VectorXd gt;
  const auto terms = mq::cost_and_gradient(pb, w, q, tau, gq, gt);
  Audit a;
  a.penalties_active = terms.velocity > 0 && terms.omega > 0 && terms.collision > 0;

  Eigen::VectorXd analytic(gq.size() + gt.size()), numeric(analytic.size());
  analytic << Eigen::Map<const Eigen::VectorXd>(gq.data(), gq.size()), gt;
  auto f = [&](const Eigen::Matrix3Xd& qq, const Eigen::VectorXd& tt) {
    Eigen::Matrix3Xd g1;
    Eigen::VectorXd g2;
    return mq::cost_and_gradient(pb, w, qq, tt, g1, g2).total;
  };
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    Eigen::Matrix3Xd qp = q, qm = q;
    qp.data()[i] += h;
    qm.data()[i] -= h;
    numeric(i) = (f(qp, tau) - f(qm, tau)) / (2 * h);
  }
  for (Eigen::Index k = 0; k < tau.size(); ++k) {
    Eigen::VectorXd tp = tau, tm = tau;
    tp(k) += h;
    tm(k) -= h;
    numeric(q.size() + k) = (f(q, tp) - f(q, tm)) / (2 * h);
  }
  const double floor = 1e-6 * numeric.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < numeric.size(); ++i) {
    const double rel = std::abs(analytic(i) - numeric(i)) / std::max(std::abs(numeric(i)), floor);
    a.worst = std::max(a.worst, rel);
  }
  return a;
}

struct RlsRun {
  int converged = -1;    // first step within tol of the first slope
  int reconverged = -1;  // steps after the change until within tol again
};

// Runs the recursion on noise-free data a_meas = slope * c.
inline RlsRun run_rls(double rho, double tol, int change_at, double before, double after) {
  mq::RlsState r;
  r.rho = rho;
  r.H = 1.0;
  r.P = 100.0;
  RlsRun out;
  for (int n = 1; n <= change_at + 1000; ++n) {
    const double slope = n <= change_at ? before : after;
    const double a_cmd = 9.81 + 0.5 * std::sin(0.05 * n);
    r = mq::rls_update(r, a_cmd, slope * a_cmd / r.H);
    if (n <= change_at && out.converged < 0 && std::abs(r.H - before) < tol) out.converged = n;
    if (n > change_at && out.reconverged < 0 && std::abs(r.H - after) < tol) {
      out.reconverged = n - change_at;
    }
  }
  return out;
}

}  // namespace oracle
