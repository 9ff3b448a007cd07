#pragma once

#include "radner/types.hpp"

namespace radner {

/// Thomas algorithm for a fixed tridiagonal matrix and many right-hand sides.
/// lower(0) and upper(n-1) are ignored.
class TridiagonalSolver {
public:
  TridiagonalSolver() = default;
  TridiagonalSolver(const VectorXd &lower, const VectorXd &diag, const VectorXd &upper) {
    factor(lower, diag, upper);
  }

  void factor(const VectorXd &lower, const VectorXd &diag, const VectorXd &upper);

  /// Solves in place, one column per right-hand side.
  void solve(Eigen::Ref<MatrixXd> rhs) const;

  Index size() const { return denom_.size(); }

private:
  VectorXd lower_;
  VectorXd upper_mod_; // c'_k
  VectorXd denom_;     // 1 / (b_k - a_k c'_{k-1})
};

} // namespace radner
