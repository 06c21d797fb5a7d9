#pragma once

#include <functional>

#include <Eigen/Dense>

namespace morphquad {

struct LbfgsParams {
  int memory = 12;
  int max_iterations = 3000;
  /// Stop when ||g|| < g_epsilon * max(1, |f|).
  double g_epsilon = 1e-5;
  /// Stop when the relative decrease over `past` iterations drops below
  /// `delta`. Disabled when past == 0.
  int past = 3;
  double delta = 1e-6;
  double armijo = 1e-4;
  double curvature = 0.9;
  int max_linesearch = 60;
  double max_step = 1e20;
  /// Called with (iteration, f) after every accepted step.
  std::function<void(int, double)> on_iterate;
};

enum class LbfgsStatus { kConverged, kStalled, kMaxIterations, kLineSearchFailed };

struct LbfgsResult {
  LbfgsStatus status = LbfgsStatus::kMaxIterations;
  double f = 0.0;
  int iterations = 0;
  int evaluations = 0;
};

/// Objective returns f(x) and writes the gradient into its second argument.
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

/// Limited-memory BFGS with a bracketing weak-Wolfe line search
/// (Lewis-Overton). Pairs with non-positive curvature are skipped. `x` holds
/// the best iterate on return.
LbfgsResult lbfgs_minimize(Eigen::VectorXd& x, const Objective& objective,
                           const LbfgsParams& params = {});

}  // namespace morphquad
