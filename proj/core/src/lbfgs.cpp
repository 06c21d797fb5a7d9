#include "morphquad/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <vector>

namespace morphquad {

namespace {

struct Pair {
  Eigen::VectorXd s;
  Eigen::VectorXd y;
  double rho;
};

Eigen::VectorXd two_loop(const std::deque<Pair>& mem, const Eigen::VectorXd& g) {
  Eigen::VectorXd d = -g;
  std::vector<double> alpha(mem.size());
  for (int i = static_cast<int>(mem.size()) - 1; i >= 0; --i) {
    alpha[i] = mem[i].rho * mem[i].s.dot(d);
    d -= alpha[i] * mem[i].y;
  }
  if (!mem.empty()) {
    const Pair& last = mem.back();
    d *= last.s.dot(last.y) / last.y.squaredNorm();
  }
  for (std::size_t i = 0; i < mem.size(); ++i) {
    const double beta = mem[i].rho * mem[i].y.dot(d);
    d += (alpha[i] - beta) * mem[i].s;
  }
  return d;
}

}  // namespace

LbfgsResult lbfgs_minimize(Eigen::VectorXd& x, const Objective& objective,
                           const LbfgsParams& params) {
  LbfgsResult result;
  const Eigen::Index n = x.size();
  Eigen::VectorXd g(n), g_next(n), x_next(n);
  double f = objective(x, g);
  ++result.evaluations;
  result.f = f;

  std::deque<Pair> mem;
  std::deque<double> history{f};

  if (g.norm() < params.g_epsilon * std::max(1.0, std::abs(f))) {
    result.status = LbfgsStatus::kConverged;
    return result;
  }

  Eigen::VectorXd d = -g;
  double step = 1.0 / std::max(1.0, d.norm());

  for (int iter = 1; iter <= params.max_iterations; ++iter) {
    result.iterations = iter;
    const double slope = g.dot(d);
    if (!(slope < 0.0)) {
      // Not a descent direction; restart from steepest descent.
      mem.clear();
      d = -g;
      step = 1.0 / std::max(1.0, d.norm());
      continue;
    }

    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    bool accepted = false;
    double f_next = f;
    for (int ls = 0; ls < params.max_linesearch; ++ls) {
      x_next = x + step * d;
      f_next = objective(x_next, g_next);
      ++result.evaluations;
      if (!std::isfinite(f_next) || f_next > f + params.armijo * step * slope) {
        hi = step;
      } else if (g_next.dot(d) < params.curvature * slope) {
        lo = step;
      } else {
        accepted = true;
        break;
      }
      step = std::isinf(hi) ? std::min(2.0 * step, params.max_step) : 0.5 * (lo + hi);
    }
    if (!accepted) {
      // Keep an Armijo-only improvement if the bracket collapsed on one.
      if (lo > 0.0) {
        x_next = x + lo * d;
        f_next = objective(x_next, g_next);
        ++result.evaluations;
        if (std::isfinite(f_next) && f_next <= f) {
          x = x_next;
          g = g_next;
          f = f_next;
        }
      }
      result.f = f;
      result.status = LbfgsStatus::kLineSearchFailed;
      return result;
    }

    Pair p{x_next - x, g_next - g, 0.0};
    const double sy = p.s.dot(p.y);
    x = x_next;
    g = g_next;
    f = f_next;
    result.f = f;
    if (params.on_iterate) params.on_iterate(iter, f);

    if (g.norm() < params.g_epsilon * std::max(1.0, std::abs(f))) {
      result.status = LbfgsStatus::kConverged;
      return result;
    }
    if (params.past > 0) {
      history.push_back(f);
      if (static_cast<int>(history.size()) > params.past + 1) history.pop_front();
      if (static_cast<int>(history.size()) == params.past + 1 &&
          (history.front() - f) / std::max(1.0, std::abs(f)) < params.delta) {
        result.status = LbfgsStatus::kStalled;
        return result;
      }
    }

    if (sy > 1e-12 * p.s.squaredNorm()) {
      p.rho = 1.0 / sy;
      mem.push_back(std::move(p));
      if (static_cast<int>(mem.size()) > params.memory) mem.pop_front();
    }
    d = two_loop(mem, g);
    step = 1.0;
  }
  result.status = LbfgsStatus::kMaxIterations;
  return result;
}

}  // namespace morphquad
