#include "radner/grid.hpp"

#include "radner/errors.hpp"

#include <algorithm>
#include <cmath>

namespace radner {

Index GridSpec::num_nodes() const {
  Index n = 1;
  for (int k = 0; k < dim(); ++k)
    n *= nodes_along(k);
  return n;
}

std::array<int, 2> GridSpec::multi_index(Index flat) const {
  const int n0 = nodes_along(0);
  return {static_cast<int>(flat % n0), static_cast<int>(flat / n0)};
}

VectorXd GridSpec::node(Index flat) const {
  const auto mi = multi_index(flat);
  VectorXd x(dim());
  for (int k = 0; k < dim(); ++k)
    x(k) = x_min(k) + mi[static_cast<std::size_t>(k)] * dx(k);
  return x;
}

bool GridSpec::on_boundary(Index flat) const {
  const auto mi = multi_index(flat);
  for (int k = 0; k < dim(); ++k) {
    const int i = mi[static_cast<std::size_t>(k)];
    if (i == 0 || i == x_steps[static_cast<std::size_t>(k)])
      return true;
  }
  return false;
}

void GridSpec::validate() const {
  if (dim() < 1 || dim() > 2)
    throw InvalidInput("only one- and two-dimensional lattices are supported");
  if (t_steps < 2)
    throw InvalidInput("t_steps must be at least 2");
  if (x_min.size() != dim() || x_max.size() != dim())
    throw InvalidInput("grid bounds do not match the lattice dimension");
  for (int k = 0; k < dim(); ++k) {
    if (!(x_min(k) < x_max(k)))
      throw InvalidInput("grid requires x_min < x_max in every dimension");
    if (x_steps[static_cast<std::size_t>(k)] < 4)
      throw InvalidInput("grid requires at least 4 spatial intervals per dimension");
  }
}

MatrixXd SolutionGrid::gradient(int n, Index node) const {
  const int d = dim();
  MatrixXd g(components, d);
  const auto &row = gradients[static_cast<std::size_t>(n)];
  for (int j = 0; j < components; ++j)
    for (int k = 0; k < d; ++k)
      g(j, k) = row(node, j * d + k);
  return g;
}

MatrixXd lattice_gradient(const GridSpec &grid, const MatrixXd &values) {
  const int d = grid.dim();
  const Index J = values.cols();
  const Index nodes = grid.num_nodes();
  MatrixXd grad(nodes, J * d);
  for (Index p = 0; p < nodes; ++p) {
    const auto mi = grid.multi_index(p);
    for (int k = 0; k < d; ++k) {
      const int i = mi[static_cast<std::size_t>(k)];
      const int last = grid.x_steps[static_cast<std::size_t>(k)];
      const double h = grid.dx(k);
      auto at = [&](int shift) {
        auto m = mi;
        m[static_cast<std::size_t>(k)] = i + shift;
        return values.row(grid.flat_index(m[0], m[1]));
      };
      RowVectorXd g;
      if (i == 0)
        g = (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
      else if (i == last)
        g = (3.0 * at(0) - 4.0 * at(-1) + at(-2)) / (2.0 * h);
      else
        g = (at(1) - at(-1)) / (2.0 * h);
      for (Index j = 0; j < J; ++j)
        grad(p, j * d + k) = g(j);
    }
  }
  return grad;
}

GridInterpolator::Weights GridInterpolator::locate(double t, const VectorXd &x) const {
  Weights w;
  const double dt = grid_.dt(horizon_);
  double s = std::clamp(t / dt, 0.0, static_cast<double>(grid_.t_steps));
  int n = std::min(static_cast<int>(std::floor(s)), grid_.t_steps - 1);
  w.n = n;
  w.theta = s - n;

  const int d = grid_.dim();
  std::array<int, 2> lo{0, 0};
  std::array<double, 2> frac{0.0, 0.0};
  for (int k = 0; k < d; ++k) {
    const double h = grid_.dx(k);
    double u = (x(k) - grid_.x_min(k)) / h;
    const int last = grid_.x_steps[static_cast<std::size_t>(k)];
    if (u < 0.0 || u > last) {
      w.extrapolated = true;
      u = std::clamp(u, 0.0, static_cast<double>(last));
    }
    int i = std::min(static_cast<int>(std::floor(u)), last - 1);
    lo[static_cast<std::size_t>(k)] = i;
    frac[static_cast<std::size_t>(k)] = u - i;
  }
  if (d == 1) {
    w.size = 2;
    w.nodes = {grid_.flat_index(lo[0]), grid_.flat_index(lo[0] + 1), 0, 0};
    w.w = {1.0 - frac[0], frac[0], 0.0, 0.0};
  } else {
    w.size = 4;
    w.nodes = {grid_.flat_index(lo[0], lo[1]), grid_.flat_index(lo[0] + 1, lo[1]),
               grid_.flat_index(lo[0], lo[1] + 1), grid_.flat_index(lo[0] + 1, lo[1] + 1)};
    w.w = {(1 - frac[0]) * (1 - frac[1]), frac[0] * (1 - frac[1]), (1 - frac[0]) * frac[1],
           frac[0] * frac[1]};
  }
  return w;
}

RowVectorXd GridInterpolator::interpolate(const std::vector<MatrixXd> &field,
                                          const Weights &w) const {
  const auto &a = field[static_cast<std::size_t>(w.n)];
  const auto &b = field[static_cast<std::size_t>(w.n + 1)];
  RowVectorXd out = RowVectorXd::Zero(a.cols());
  for (int q = 0; q < w.size; ++q)
    out += w.w[static_cast<std::size_t>(q)] *
           ((1.0 - w.theta) * a.row(w.nodes[static_cast<std::size_t>(q)]) +
            w.theta * b.row(w.nodes[static_cast<std::size_t>(q)]));
  return out;
}

double GridInterpolator::interpolate(const std::vector<MatrixXd> &field, const Weights &w,
                                     Index col) const {
  const auto &a = field[static_cast<std::size_t>(w.n)];
  const auto &b = field[static_cast<std::size_t>(w.n + 1)];
  double out = 0.0;
  for (int q = 0; q < w.size; ++q) {
    const Index p = w.nodes[static_cast<std::size_t>(q)];
    out += w.w[static_cast<std::size_t>(q)] * ((1.0 - w.theta) * a(p, col) + w.theta * b(p, col));
  }
  return out;
}

} // namespace radner
