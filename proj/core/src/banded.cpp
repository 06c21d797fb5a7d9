#include "morphquad/banded.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <utility>

namespace morphquad {

BandedMatrix::BandedMatrix(int n, int kl, int ku) { reset(n, kl, ku); }

void BandedMatrix::reset(int n, int kl, int ku) {
  n_ = n;
  kl_ = kl;
  ku_ = ku;
  width_ = 2 * kl + ku + 1;
  band_.assign(static_cast<std::size_t>(n) * width_, 0.0);
  lower_.assign(static_cast<std::size_t>(n) * std::max(kl, 1), 0.0);
  pivot_.assign(n, 0);
  factored_ = false;
}

bool BandedMatrix::factorize() {
  const int upper = kl_ + ku_;
  for (int k = 0; k < n_; ++k) {
    const int last = std::min(n_ - 1, k + kl_);
    int p = k;
    double best = std::abs((*this)(k, k));
    for (int i = k + 1; i <= last; ++i) {
      const double v = std::abs((*this)(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    pivot_[k] = p;
    if (best == 0.0) return false;

    const int jmax = std::min(n_ - 1, k + upper);
    if (p != k) {
      for (int j = k; j <= jmax; ++j) std::swap((*this)(k, j), (*this)(p, j));
    }
    const double piv = (*this)(k, k);
    for (int i = k + 1; i <= last; ++i) {
      const double m = (*this)(i, k) / piv;
      lower_[static_cast<std::size_t>(k) * kl_ + (i - k - 1)] = m;
      (*this)(i, k) = 0.0;
      if (m == 0.0) continue;
      for (int j = k + 1; j <= jmax; ++j) (*this)(i, j) -= m * (*this)(k, j);
    }
  }
  factored_ = true;
  return true;
}

void BandedMatrix::solve(Eigen::Ref<Eigen::MatrixXd> b) const {
  assert(factored_ && b.rows() == n_);
  const int upper = kl_ + ku_;
  for (int k = 0; k < n_; ++k) {
    if (pivot_[k] != k) b.row(k).swap(b.row(pivot_[k]));
    const int last = std::min(n_ - 1, k + kl_);
    for (int i = k + 1; i <= last; ++i) {
      const double m = lower_[static_cast<std::size_t>(k) * kl_ + (i - k - 1)];
      if (m != 0.0) b.row(i) -= m * b.row(k);
    }
  }
  for (int i = n_ - 1; i >= 0; --i) {
    const int jmax = std::min(n_ - 1, i + upper);
    for (int j = i + 1; j <= jmax; ++j) b.row(i) -= (*this)(i, j) * b.row(j);
    b.row(i) /= (*this)(i, i);
  }
}

void BandedMatrix::solve_transposed(Eigen::Ref<Eigen::MatrixXd> b) const {
  assert(factored_ && b.rows() == n_);
  const int upper = kl_ + ku_;
  // U^T y = b, forward.
  for (int i = 0; i < n_; ++i) {
    const int jmin = std::max(0, i - upper);
    for (int j = jmin; j < i; ++j) b.row(i) -= (*this)(j, i) * b.row(j);
    b.row(i) /= (*this)(i, i);
  }
  // x = M_1^T ... M_{n-1}^T y with M_k = L_k P_k.
  for (int k = n_ - 1; k >= 0; --k) {
    const int last = std::min(n_ - 1, k + kl_);
    for (int i = k + 1; i <= last; ++i) {
      const double m = lower_[static_cast<std::size_t>(k) * kl_ + (i - k - 1)];
      if (m != 0.0) b.row(k) -= m * b.row(i);
    }
    if (pivot_[k] != k) b.row(k).swap(b.row(pivot_[k]));
  }
}

}  // namespace morphquad
