#pragma once

#include <Eigen/Dense>

#include <functional>

namespace radner {

template <typename Scalar> using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar> using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
template <typename Scalar> using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

// Functions of (t, x) on [0,T] x R^d.
using ScalarField = std::function<double(double, const VectorXd &)>;
using VectorField = std::function<VectorXd(double, const VectorXd &)>;
using RowField = std::function<RowVectorXd(double, const VectorXd &)>;
using MatrixField = std::function<MatrixXd(double, const VectorXd &)>;

} // namespace radner
