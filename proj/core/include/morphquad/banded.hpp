#pragma once

#include <vector>

#include <Eigen/Dense>

namespace morphquad {

/// Square banded matrix with lower bandwidth `kl` and upper bandwidth `ku`,
/// factored in place by Gaussian elimination with partial (row) pivoting.
/// Pivoting widens the upper band of U to kl + ku, which the storage
/// accounts for from the start.
class BandedMatrix {
 public:
  BandedMatrix() = default;
  BandedMatrix(int n, int kl, int ku);

  void reset(int n, int kl, int ku);

  [[nodiscard]] int size() const { return n_; }

  /// Element access inside the original band; (i, j) outside it is a bug.
  double& operator()(int i, int j) { return band_[index(i, j)]; }
  [[nodiscard]] double operator()(int i, int j) const { return band_[index(i, j)]; }

  /// Returns false if a zero pivot was met (matrix singular).
  bool factorize();

  /// Solves A X = B in place (B is n x m).
  void solve(Eigen::Ref<Eigen::MatrixXd> b) const;
  /// Solves A^T X = B in place.
  void solve_transposed(Eigen::Ref<Eigen::MatrixXd> b) const;

 private:
  [[nodiscard]] std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * width_ + (j - i + kl_);
  }

  int n_ = 0;
  int kl_ = 0;
  int ku_ = 0;
  int width_ = 0;  // kl + (kl + ku) + 1
  std::vector<double> band_;
  std::vector<double> lower_;  // multipliers, kl per step
  std::vector<int> pivot_;
  bool factored_ = false;
};

}  // namespace morphquad
