#include "radner/drivers.hpp"

#include "radner/errors.hpp"

#include <sstream>
#include <stdexcept>

namespace radner {

namespace {

constexpr double kExpArgLimit = 700.0;

void check_input(const Economy &econ, const DriverInput &in) {
  const Index J = econ.num_agents() + 1;
  if (in.y.size() != J || in.z.rows() != J || in.z.cols() != in.x.size())
    throw InvalidInput("driver input dimensions do not match the economy");
}

VectorXd evaluate_at(const Economy &econ, DriverVariant v, const TruncationLevel &level,
                     const DriverInput &in) {
  check_input(econ, in);
  VectorXd out(econ.num_agents() + 1);
  evaluate_driver(econ, v, level, point_data(econ, in.t, in.x), in.y, in.z, out, nullptr, in.t,
                  &in.x);
  return out;
}

} // namespace

std::string to_string(DriverVariant v) {
  switch (v) {
  case DriverVariant::full:
    return "full";
  case DriverVariant::truncated:
    return "truncated";
  case DriverVariant::intermediate:
    return "intermediate";
  }
  return "unknown";
}

double guarded_exp(double arg, ExpClampCounter *counter, double t, const VectorXd *x) {
  if (arg > kExpArgLimit || arg < -kExpArgLimit) {
    if (counter) {
      if (counter->count == 0) {
        counter->first_argument = arg;
        counter->first_t = t;
        if (x)
          counter->first_x = *x;
      }
      ++counter->count;
    }
    arg = std::clamp(arg, -kExpArgLimit, kExpArgLimit);
  }
  return std::exp(arg);
}

PointData point_data(const Economy &econ, double t, const VectorXd &x) {
  PointData pd;
  pd.ba_mu_e = econ.ba * econ.mu_e(t, x);
  pd.endowments.resize(econ.num_agents());
  for (int i = 0; i < econ.num_agents(); ++i)
    pd.endowments(i) = econ.endowment(i, t, x);
  return pd;
}

void evaluate_driver(const Economy &econ, DriverVariant variant, const TruncationLevel &level,
                     const PointData &pd, const VectorXd &y, const MatrixXd &z,
                     Eigen::Ref<VectorXd> out, ExpClampCounter *clamps, double t,
                     const VectorXd *x) {
  const int I = econ.num_agents();
  const bool full = variant == DriverVariant::full;
  const double zN = level.N;
  const double yN = variant == DriverVariant::intermediate ? level.inner() : level.N;

  auto quad = [&](Index row) {
    return full ? z.row(row).squaredNorm() : q_trunc(z.row(row), zN);
  };
  auto clampy = [&](double v) { return full ? v : iota(v, yN); };

  const double a = clampy(y(0));
  const double ea = guarded_exp(-a, clamps, t, x);

  double quad0 = 0.0;
  for (int l = 1; l <= I; ++l)
    quad0 += econ.kappas(l - 1) * quad(l);
  out(0) = pd.ba_mu_e - 0.5 * quad0 - ea;
  for (int i = 1; i <= I; ++i)
    out(i) = 0.5 * quad(i) + ea * (1.0 + a + clampy(y(i)) - econ.alpha(i - 1) * pd.endowments(i - 1));
}

VectorXd driver_full(const Economy &econ, const DriverInput &in) {
  return evaluate_at(econ, DriverVariant::full, TruncationLevel{}, in);
}

VectorXd driver_truncated(const Economy &econ, const TruncationLevel &level, const DriverInput &in) {
  if (!(level.N > 0.0))
    throw InvalidInput("truncation level N must be positive");
  return evaluate_at(econ, DriverVariant::truncated, level, in);
}

VectorXd driver_intermediate(const Economy &econ, const TruncationLevel &level,
                             const DriverInput &in) {
  if (!(level.N > 0.0) || !level.N0 || !(*level.N0 > 0.0) || *level.N0 > level.N)
    throw InvalidInput("intermediate driver needs 0 < N0 <= N");
  return evaluate_at(econ, DriverVariant::intermediate, level, in);
}

Driver Driver::full(Economy econ) { return Driver(std::move(econ), DriverVariant::full, {}); }

Driver Driver::truncated(Economy econ, double N) {
  if (!(N > 0.0))
    throw InvalidInput("truncation level N must be positive");
  return Driver(std::move(econ), DriverVariant::truncated, TruncationLevel{N, std::nullopt});
}

Driver Driver::intermediate(Economy econ, double N, double N0) {
  if (!(N > 0.0) || !(N0 > 0.0) || N0 > N)
    throw InvalidInput("intermediate driver needs 0 < N0 <= N");
  return Driver(std::move(econ), DriverVariant::intermediate, TruncationLevel{N, N0});
}

VectorXd Driver::operator()(const DriverInput &in) const {
  check_input(econ_, in);
  VectorXd out(econ_.num_agents() + 1);
  evaluate(in.t, in.x, point_data(econ_, in.t, in.x), in.y, in.z, out);
  return out;
}

void Driver::evaluate(double t, const VectorXd &x, const PointData &pd, const VectorXd &y,
                      const MatrixXd &z, Eigen::Ref<VectorXd> out) const {
  evaluate_driver(econ_, variant_, level_, pd, y, z, out, &clamps_, t, &x);
}

VectorXd Driver::terminal(const VectorXd &x) const {
  const int I = econ_.num_agents();
  VectorXd g(I + 1);
  g(0) = 0.0;
  for (int i = 1; i <= I; ++i) {
    const double v = econ_.alpha(i - 1) * econ_.endowment(i - 1, econ_.horizon, x);
    g(i) = variant_ == DriverVariant::truncated ? iota(v, level_.N) : v;
  }
  return g;
}

std::string Driver::describe() const {
  std::ostringstream os;
  os << to_string(variant_);
  if (variant_ != DriverVariant::full)
    os << "(N=" << level_.N;
  if (variant_ == DriverVariant::intermediate)
    os << ",N0=" << level_.inner();
  if (variant_ != DriverVariant::full)
    os << ")";
  return os.str();
}

EconomyBounds declared_bounds(const Economy &econ, double mu_e_sup) {
  EconomyBounds b;
  b.mu_e_sup = mu_e_sup;
  for (const auto &a : econ.agents)
    b.endowment_sup.push_back(a.endowment_bound);
  return b;
}

double truncated_lipschitz_constant(const Economy &econ, double N, const EconomyBounds &bounds) {
  const int I = econ.num_agents();
  const double eN = std::exp(std::min(N, kExpArgLimit));
  // Rows bounded separately, then summed: |df|_2 <= |df|_1.
  double Ly = eN;
  for (int i = 0; i < I; ++i)
    Ly += eN * (2.0 * N + econ.alpha(i) * bounds.endowment_sup[static_cast<std::size_t>(i)] + 1.0);
  // q_N has slope at most 2N in z.
  const double Lz = N * static_cast<double>(1 + I);
  return std::max(Ly, Lz);
}

double bf_universal_constant(const Economy &econ, const TruncationLevel &level,
                             const EconomyBounds &bounds) {
  double max_ae = 0.0;
  for (int i = 0; i < econ.num_agents(); ++i)
    max_ae = std::max(max_ae, econ.alpha(i) * bounds.endowment_sup[static_cast<std::size_t>(i)]);
  const double N0 = level.inner();
  return econ.ba * bounds.mu_e_sup + std::exp(std::min(N0, kExpArgLimit)) * (2.0 * N0 + max_ae + 2.0);
}

BfSplit bf_split(const Economy &econ, const TruncationLevel &level, const EconomyBounds &bounds,
                 const DriverInput &in) {
  check_input(econ, in);
  const int I = econ.num_agents();
  const double N = level.N;
  const double N0 = level.inner();
  const PointData pd = point_data(econ, in.t, in.x);

  BfSplit s;
  s.f1.resize(I + 1);
  s.f2.resize(I + 1);
  const double a = iota(in.y(0), N0);
  const double ea = guarded_exp(-a);
  s.f1(0) = pd.ba_mu_e - ea;
  double quad0 = 0.0;
  for (int l = 1; l <= I; ++l)
    quad0 += econ.kappas(l - 1) * q_trunc(in.z.row(l), N);
  s.f2(0) = -0.5 * quad0;
  for (int i = 1; i <= I; ++i) {
    s.f1(i) = ea * (iota(in.y(i), N0) + a - econ.alpha(i - 1) * pd.endowments(i - 1) + 1.0);
    s.f2(i) = 0.5 * q_trunc(in.z.row(i), N);
  }

  TruncationLevel inter{N, N0};
  VectorXd f(I + 1);
  evaluate_driver(econ, DriverVariant::intermediate, inter, pd, in.y, in.z, f);
  s.split_error = (s.f1 + s.f2 - f).cwiseAbs().maxCoeff();
  if (s.split_error > 1e-12 * (1.0 + f.cwiseAbs().maxCoeff()))
    throw std::logic_error("Bensoussan-Frehse split does not reproduce the driver");

  s.C = bf_universal_constant(econ, level, bounds);
  s.worst_f1_ratio = s.f1.cwiseAbs().maxCoeff() / s.C;

  // Ordering (Y^1, ..., Y^I, a): row Y^i may grow like |z^1|^2 + ... + |z^i|^2,
  // row a like the sum over all rows.
  double partial = 0.0;
  for (int i = 1; i <= I; ++i) {
    partial += in.z.row(i).squaredNorm();
    s.worst_f2_ratio = std::max(s.worst_f2_ratio, std::abs(s.f2(i)) / (s.C * (1.0 + partial)));
  }
  const double total = partial + in.z.row(0).squaredNorm();
  s.worst_f2_ratio = std::max(s.worst_f2_ratio, std::abs(s.f2(0)) / (s.C * (1.0 + total)));

  constexpr double slack = 1.0 + 1e-12;
  s.f1_bounded = s.worst_f1_ratio <= slack;
  s.f2_triangular = s.worst_f2_ratio <= slack;
  return s;
}

} // namespace radner
