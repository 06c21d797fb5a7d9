#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "morphquad/trajectory.hpp"
#include "oracles.hpp"

namespace mq = morphquad;
using mq::Vec3;

namespace {

using oracle::mono;

struct Instance {
  mq::BoundaryState start, goal;
  Eigen::Matrix3Xd q;
  Eigen::VectorXd T;
};

Instance random_instance(int K, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0), dur(0.6, 1.8);
  Instance in;
  in.start = {Vec3(u(rng), u(rng), u(rng)), Vec3(u(rng), u(rng), u(rng)),
              Vec3(u(rng), u(rng), u(rng))};
  in.goal = {Vec3(u(rng), u(rng), u(rng)) + Vec3(3, 0, 0), Vec3(u(rng), u(rng), u(rng)),
             Vec3(u(rng), u(rng), u(rng))};
  in.q.resize(3, K - 1);
  for (int i = 0; i < K - 1; ++i) in.q.col(i) = Vec3(i + 1.0, 0, 0) + Vec3(u(rng), u(rng), u(rng));
  in.T.resize(K);
  for (int k = 0; k < K; ++k) in.T(k) = dur(rng);
  return in;
}

mq::MincoTrajectory solve(const Instance& in) {
  mq::MincoTrajectory t;
  t.solve(in.start, in.goal, in.q, in.T);
  return t;
}

// Exact for polynomials up to degree 5 on [0, T].
template <typename Fn>
double gauss3(double T, Fn f) {
  const double x = std::sqrt(0.6);
  const double h = T / 2.0;
  return h * (5.0 / 9.0 * f(h * (1 - x)) + 8.0 / 9.0 * f(h) + 5.0 / 9.0 * f(h * (1 + x)));
}

Eigen::Matrix<double, 6, 6> jerk_gram(double T) {
  Eigen::Matrix<double, 6, 6> Q;
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      Q(i, j) = gauss3(T, [&](double t) { return mono(t, i, 3) * mono(t, j, 3); });
    }
  }
  return Q;
}

}  // namespace

TEST(Minco, SingleRestToRestMatchesSixBySixSolve) {
  Eigen::Matrix<double, 6, 6> A;
  Eigen::Matrix<double, 6, 1> b;
  for (int r = 0; r < 3; ++r) {
    for (int p = 0; p < 6; ++p) {
      A(r, p) = mono(0.0, p, r);
      A(3 + r, p) = mono(1.0, p, r);
    }
  }
  b << 0, 0, 0, 1, 0, 0;
  const Eigen::Matrix<double, 6, 1> oracle = A.partialPivLu().solve(b);
  Eigen::Matrix<double, 6, 1> expected;
  expected << 0, 0, 0, 10, -15, 6;
  EXPECT_LT((oracle - expected).norm(), 1e-12);

  mq::MincoTrajectory t;
  t.solve(mq::BoundaryState::rest(Vec3::Zero()), mq::BoundaryState::rest(Vec3(1, 0, 0)),
          Eigen::Matrix3Xd(3, 0), Eigen::VectorXd::Ones(1));
  EXPECT_LT((t.piece(0).col(0) - oracle).norm(), 1e-12);
  EXPECT_LT(t.piece(0).rightCols<2>().norm(), 1e-12);
}

TEST(Minco, ReproducesAGlobalQuintic) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::Matrix<double, 6, 3> P;
  for (int i = 0; i < 6; ++i) P.row(i) << u(rng), u(rng), u(rng);
  auto eval = [&](double t, int order) {
    Vec3 v = Vec3::Zero();
    for (int i = 0; i < 6; ++i) v += mono(t, i, order) * P.row(i).transpose();
    return v;
  };
  Eigen::VectorXd T(3);
  T << 0.7, 1.1, 0.9;
  Eigen::Matrix3Xd q(3, 2);
  q.col(0) = eval(0.7, 0);
  q.col(1) = eval(1.8, 0);
  mq::MincoTrajectory traj;
  traj.solve({eval(0, 0), eval(0, 1), eval(0, 2)}, {eval(2.7, 0), eval(2.7, 1), eval(2.7, 2)},
             q, T);
  for (double t = 0.0; t <= 2.7; t += 0.05) {
    for (int order = 0; order <= 4; ++order) {
      EXPECT_LT((traj.evaluate(t, order) - eval(t, order)).norm(), 1e-9) << t << " " << order;
    }
  }
}

TEST(Minco, InterpolatesAndIsC4) {
  const auto in = random_instance(4, 17);
  const auto traj = solve(in);
  EXPECT_LT((traj.evaluate(0.0, 0) - in.start.p).norm(), 1e-9);
  EXPECT_LT((traj.evaluate(0.0, 1) - in.start.v).norm(), 1e-9);
  EXPECT_LT((traj.evaluate(0.0, 2) - in.start.a).norm(), 1e-9);
  EXPECT_LT((traj.evaluate(traj.duration(), 0) - in.goal.p).norm(), 1e-9);
  EXPECT_LT((traj.evaluate(traj.duration(), 1) - in.goal.v).norm(), 1e-9);
  EXPECT_LT((traj.evaluate(traj.duration(), 2) - in.goal.a).norm(), 1e-9);
  for (int k = 0; k + 1 < traj.pieces(); ++k) {
    const auto left = traj.piece(k), right = traj.piece(k + 1);
    const double Tk = in.T(k);
    for (int order = 0; order <= 4; ++order) {
      Vec3 l = Vec3::Zero(), r = Vec3::Zero();
      for (int i = 0; i < 6; ++i) {
        l += mono(Tk, i, order) * left.row(i).transpose();
        r += mono(0.0, i, order) * right.row(i).transpose();
      }
      EXPECT_LT((l - r).norm(), 1e-8) << "junction " << k << " order " << order;
      if (order == 0) EXPECT_LT((l - in.q.col(k)).norm(), 1e-9);
    }
  }
}

TEST(Minco, DerivativeMatchesFiniteDifference) {
  const auto traj = solve(random_instance(3, 23));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.01, traj.duration() - 0.01);
  const double h = 1e-5;
  for (int i = 0; i < 100; ++i) {
    const double t = u(rng);
    const Vec3 fd = (traj.evaluate(t + h, 0) - traj.evaluate(t - h, 0)) / (2 * h);
    EXPECT_LT((traj.evaluate(t, 1) - fd).norm(), 1e-6);
  }
}

TEST(Minco, DomainAndDurationErrors) {
  const auto in = random_instance(2, 3);
  const auto traj = solve(in);
  try {
    (void)traj.evaluate(traj.duration() + 0.1, 0);
    FAIL();
  } catch (const mq::Error& e) {
    EXPECT_EQ(e.code(), mq::ErrorCode::kOutOfDomain);
  }
  EXPECT_THROW((void)traj.evaluate(-0.1, 0), mq::Error);
  auto bad = in;
  bad.T(1) = 0.0;
  try {
    (void)solve(bad);
    FAIL();
  } catch (const mq::Error& e) {
    EXPECT_EQ(e.code(), mq::ErrorCode::kDegenerateTime);
  }
}

TEST(Minco, JerkCostMatchesQuadrature) {
  const auto in = random_instance(3, 31);
  const auto traj = solve(in);
  double expected = 0.0;
  for (int k = 0; k < traj.pieces(); ++k) {
    const Eigen::Matrix<double, 6, 3> c = traj.piece(k);
    expected += (c.transpose() * jerk_gram(in.T(k)) * c).trace();
  }
  EXPECT_NEAR(traj.jerk_cost(), expected, 1e-9 * expected);

  Eigen::MatrixX3d dj_dc = Eigen::MatrixX3d::Zero(6 * traj.pieces(), 3);
  Eigen::VectorXd dj_dt = Eigen::VectorXd::Zero(traj.pieces());
  traj.add_jerk_gradient(dj_dc, dj_dt);
  for (int k = 0; k < traj.pieces(); ++k) {
    const Eigen::Matrix<double, 6, 3> c = traj.piece(k);
    const Eigen::Matrix<double, 6, 3> g = 2.0 * jerk_gram(in.T(k)) * c;
    EXPECT_LT((dj_dc.middleRows<6>(6 * k) - g).norm(), 1e-8 * g.norm());
    const double h = 1e-6;
    const double fd = ((c.transpose() * jerk_gram(in.T(k) + h) * c).trace() -
                       (c.transpose() * jerk_gram(in.T(k) - h) * c).trace()) /
                      (2 * h);
    EXPECT_NEAR(dj_dt(k), fd, 1e-6 * std::abs(fd));
  }
}

namespace {

double coeff_norm(const Instance& in) {
  return mq::solve_coefficients(in.start, in.goal, in.q, in.T).squaredNorm();
}

}  // namespace

TEST(Minco, GradientOfCoefficientNormMatchesFiniteDifference) {
  for (int K : {2, 3}) {
    const auto in = random_instance(K, 40 + K);
    const auto traj = solve(in);
    Eigen::Matrix3Xd dq;
    Eigen::VectorXd dT;
    traj.propagate_gradient(2.0 * traj.coefficients(), Eigen::VectorXd::Zero(K), dq, dT);
    const double h = 1e-6;
    for (int i = 0; i < in.q.cols(); ++i) {
      for (int d = 0; d < 3; ++d) {
        auto a = in, b = in;
        a.q(d, i) += h;
        b.q(d, i) -= h;
        const double fd = (coeff_norm(a) - coeff_norm(b)) / (2 * h);
        EXPECT_NEAR(dq(d, i), fd, 1e-5 * std::max(1.0, std::abs(fd)));
      }
    }
    for (int k = 0; k < K; ++k) {
      auto a = in, b = in;
      a.T(k) += h;
      b.T(k) -= h;
      const double fd = (coeff_norm(a) - coeff_norm(b)) / (2 * h);
      EXPECT_NEAR(dT(k), fd, 1e-5 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(Minco, GradientWithoutCoefficientDependence) {
  const auto in = random_instance(3, 9);
  const auto traj = solve(in);
  Eigen::VectorXd direct(3);
  direct << 0.3, -1.2, 2.0;
  Eigen::Matrix3Xd dq;
  Eigen::VectorXd dT;
  traj.propagate_gradient(Eigen::MatrixX3d::Zero(18, 3), direct, dq, dT);
  EXPECT_EQ(dq.norm(), 0.0);
  EXPECT_LT((dT - direct).norm(), 1e-15);
}

TEST(Minco, JerkGradientThroughCoefficientMap) {
  const auto in = random_instance(4, 77);
  const auto traj = solve(in);
  Eigen::MatrixX3d dj_dc = Eigen::MatrixX3d::Zero(24, 3);
  Eigen::VectorXd dj_dt = Eigen::VectorXd::Zero(4);
  traj.add_jerk_gradient(dj_dc, dj_dt);
  Eigen::Matrix3Xd dq;
  Eigen::VectorXd dT;
  traj.propagate_gradient(dj_dc, dj_dt, dq, dT);
  auto cost = [](const Instance& x) { return solve(x).jerk_cost(); };
  const double h = 1e-6;
  for (int k = 0; k < 4; ++k) {
    auto a = in, b = in;
    a.T(k) += h;
    b.T(k) -= h;
    const double fd = (cost(a) - cost(b)) / (2 * h);
    EXPECT_NEAR(dT(k), fd, 1e-5 * std::max(1.0, std::abs(fd)));
  }
  for (int i = 0; i < 3; ++i) {
    auto a = in, b = in;
    a.q(1, i) += h;
    b.q(1, i) -= h;
    const double fd = (cost(a) - cost(b)) / (2 * h);
    EXPECT_NEAR(dq(1, i), fd, 1e-5 * std::max(1.0, std::abs(fd)));
  }
}
