#pragma once

#include "radner/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace radner {

/// Clamp to [-N, N].
template <typename Scalar> Scalar iota(Scalar x, Scalar N) { return std::max(std::min(x, N), -N); }

/// |z| * iota_N(|z|): equals |z|^2 for |z| <= N and grows linearly beyond.
template <typename Derived>
typename Derived::Scalar q_trunc(const Eigen::MatrixBase<Derived> &z, typename Derived::Scalar N) {
  const auto r = z.norm();
  return r * iota(r, N);
}

struct TruncationLevel {
  double N = 1.0;
  std::optional<double> N0; // inner truncation of the y-arguments

  double inner() const { return N0.value_or(N); }
};

enum class DriverVariant { full, truncated, intermediate };

std::string to_string(DriverVariant v);

/// Counts evaluations of exp(-y0) whose argument had to be clamped.
struct ExpClampCounter {
  std::size_t count = 0;
  double first_argument = 0.0;
  double first_t = 0.0;
  VectorXd first_x;
};

/// exp(arg) with arg clamped to [-700, 700].
double guarded_exp(double arg, ExpClampCounter *counter = nullptr, double t = 0.0,
                   const VectorXd *x = nullptr);

/// Driver arguments with the convention y(0) = a and z.row(0) = sigma.
struct DriverInput {
  double t = 0.0;
  VectorXd x;
  VectorXd y; // I+1
  MatrixXd z; // (I+1) x d
};

/// Economy data at one (t, x): ba * mu_e and the agents' endowment rates.
struct PointData {
  double ba_mu_e = 0.0;
  VectorXd endowments;
};

PointData point_data(const Economy &econ, double t, const VectorXd &x);

/// dt-coefficient of the system at one point, written into `out` (size I+1).
void evaluate_driver(const Economy &econ, DriverVariant variant, const TruncationLevel &level,
                     const PointData &pd, const VectorXd &y, const MatrixXd &z,
                     Eigen::Ref<VectorXd> out, ExpClampCounter *clamps = nullptr,
                     double t = 0.0, const VectorXd *x = nullptr);

VectorXd driver_full(const Economy &econ, const DriverInput &in);
VectorXd driver_truncated(const Economy &econ, const TruncationLevel &level, const DriverInput &in);
VectorXd driver_intermediate(const Economy &econ, const TruncationLevel &level,
                             const DriverInput &in);

/// A driver variant bound to an economy. Not thread-safe: the clamp counter
/// is updated on every evaluation.
class Driver {
public:
  static Driver full(Economy econ);
  static Driver truncated(Economy econ, double N);
  static Driver intermediate(Economy econ, double N, double N0);

  VectorXd operator()(const DriverInput &in) const;
  void evaluate(double t, const VectorXd &x, const PointData &pd, const VectorXd &y,
                const MatrixXd &z, Eigen::Ref<VectorXd> out) const;

  /// Terminal condition g: 0 for a, alpha^i e^i(T, x) for Y^i (clamped for the
  /// truncated system).
  VectorXd terminal(const VectorXd &x) const;

  const Economy &economy() const { return econ_; }
  DriverVariant variant() const { return variant_; }
  const TruncationLevel &level() const { return level_; }
  const ExpClampCounter &clamps() const { return clamps_; }
  void reset_clamps() const { clamps_ = {}; }
  std::string describe() const;

private:
  Driver(Economy econ, DriverVariant v, TruncationLevel level)
      : econ_(std::move(econ)), variant_(v), level_(level) {}

  Economy econ_;
  DriverVariant variant_;
  TruncationLevel level_;
  mutable ExpClampCounter clamps_;
};

/// Sup norms of the model data over a sample region.
struct EconomyBounds {
  double mu_e_sup = 0.0;
  std::vector<double> endowment_sup;
};

EconomyBounds declared_bounds(const Economy &econ, double mu_e_sup);

/// Global Lipschitz constant of the truncated driver in (y, z) in the sense
/// |f(y2,z2) - f(y1,z1)| <= L (|y2-y1| + |z2-z1|).
double truncated_lipschitz_constant(const Economy &econ, double N, const EconomyBounds &bounds);

/// C = ba ||mu_e|| + e^{N0} (2 N0 + max_i alpha^i ||e^i|| + 2).
double bf_universal_constant(const Economy &econ, const TruncationLevel &level,
                             const EconomyBounds &bounds);

struct BfSplit {
  VectorXd f1; // bounded part
  VectorXd f2; // quadratic part
  double C = 0.0;
  double split_error = 0.0;    // |f1 + f2 - f|_inf
  double worst_f1_ratio = 0.0; // max_i |f1^i| / C
  double worst_f2_ratio = 0.0; // max_i |f2^i| / (C (1 + sum_{j<=i} |z^j|^2))
  bool f1_bounded = false;
  bool f2_triangular = false;
};

/// Splits the intermediate driver into a bounded part and a quadratic part
/// that is upper triangular in z once a is ordered after Y^1..Y^I.
BfSplit bf_split(const Economy &econ, const TruncationLevel &level, const EconomyBounds &bounds,
                 const DriverInput &in);

} // namespace radner
