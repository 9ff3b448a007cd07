#include "radner/container.hpp"

#include "radner/errors.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace radner {

namespace {

constexpr char kMagic[8] = {'R', 'A', 'D', 'N', 'S', 'O', 'L', '1'};

static_assert(std::endian::native == std::endian::little, "container assumes little-endian");

void write_block(std::ofstream &f, const MatrixXd &m) {
  f.write(reinterpret_cast<const char *>(m.data()),
          static_cast<std::streamsize>(m.size() * static_cast<Index>(sizeof(double))));
}

void read_block(std::ifstream &f, MatrixXd &m, Index rows, Index cols) {
  m.resize(rows, cols);
  f.read(reinterpret_cast<char *>(m.data()),
         static_cast<std::streamsize>(m.size() * static_cast<Index>(sizeof(double))));
  if (!f)
    throw InvalidInput("solution file is truncated");
}

Json vec_json(const VectorXd &v) {
  Json a = Json::array();
  for (Index k = 0; k < v.size(); ++k)
    a.push_back(v(k));
  return a;
}

VectorXd json_vec(const Json &a) {
  VectorXd v(static_cast<Index>(a.size()));
  for (std::size_t k = 0; k < a.size(); ++k)
    v(static_cast<Index>(k)) = a[k].get<double>();
  return v;
}

} // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_solution(const std::string &path, const SolutionGrid &sol, const Json &extra) {
  Json h;
  h["format"] = "RADNSOL1";
  h["components"] = sol.components;
  h["dim"] = sol.dim();
  h["horizon"] = sol.horizon;
  h["grid"] = {{"t_steps", sol.grid.t_steps},
               {"x_min", vec_json(sol.grid.x_min)},
               {"x_max", vec_json(sol.grid.x_max)},
               {"x_steps", sol.grid.x_steps}};
  const SolutionMeta &m = sol.meta;
  h["meta"] = {{"fingerprint", m.fingerprint},
               {"driver", m.driver},
               {"blowup_bound", m.blowup_bound},
               {"inner_picard", m.inner_picard},
               {"inner_picard_max_iter", m.inner_picard_max_iter},
               {"inner_picard_tol", m.inner_picard_tol},
               {"exp_clamps", m.exp_clamps},
               {"stability_dt", m.stability_dt},
               {"stability_ok", m.stability_ok}};
  if (!extra.is_null())
    h["extra"] = extra;
  const std::string header = dump_json(h);

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f)
    throw InvalidInput("cannot write " + path);
  f.write(kMagic, sizeof kMagic);
  const std::uint64_t len = header.size();
  f.write(reinterpret_cast<const char *>(&len), sizeof len);
  f.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (std::size_t n = 0; n < sol.values.size(); ++n) {
    write_block(f, sol.values[n]);
    write_block(f, sol.gradients[n]);
  }
  if (!f)
    throw InvalidInput("failed writing " + path);
}

LoadedSolution read_solution(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw InvalidInput("cannot read " + path);
  char magic[8];
  f.read(magic, sizeof magic);
  if (!f || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw InvalidInput(path + " is not a solution file");
  std::uint64_t len = 0;
  f.read(reinterpret_cast<char *>(&len), sizeof len);
  if (!f || len > (1u << 26))
    throw InvalidInput("corrupt solution header in " + path);
  std::string header(len, '\0');
  f.read(header.data(), static_cast<std::streamsize>(len));

  LoadedSolution out;
  out.header = Json::parse(header);
  const Json &h = out.header;
  SolutionGrid &sol = out.sol;
  sol.components = h.at("components").get<int>();
  sol.horizon = h.at("horizon").get<double>();
  sol.grid.t_steps = h.at("grid").at("t_steps").get<int>();
  sol.grid.x_min = json_vec(h.at("grid").at("x_min"));
  sol.grid.x_max = json_vec(h.at("grid").at("x_max"));
  sol.grid.x_steps = h.at("grid").at("x_steps").get<std::vector<int>>();
  sol.grid.validate();
  const Json &m = h.at("meta");
  sol.meta.fingerprint = m.at("fingerprint").get<std::string>();
  sol.meta.driver = m.at("driver").get<std::string>();
  sol.meta.blowup_bound = m.at("blowup_bound").get<double>();
  sol.meta.inner_picard = m.at("inner_picard").get<bool>();
  sol.meta.inner_picard_max_iter = m.at("inner_picard_max_iter").get<int>();
  sol.meta.inner_picard_tol = m.at("inner_picard_tol").get<double>();
  sol.meta.exp_clamps = m.at("exp_clamps").get<std::size_t>();
  sol.meta.stability_dt =
      m.at("stability_dt").is_null() ? INFINITY : m.at("stability_dt").get<double>();
  sol.meta.stability_ok = m.at("stability_ok").get<bool>();

  const Index nodes = sol.grid.num_nodes();
  const Index J = sol.components;
  const Index d = sol.dim();
  sol.values.resize(static_cast<std::size_t>(sol.grid.t_steps) + 1);
  sol.gradients.resize(sol.values.size());
  for (std::size_t n = 0; n < sol.values.size(); ++n) {
    read_block(f, sol.values[n], nodes, J);
    read_block(f, sol.gradients[n], nodes, J * d);
  }
  return out;
}

void write_csv_slice(const std::string &path, const SolutionGrid &sol, int time_index) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f)
    throw InvalidInput("cannot write " + path);
  const int d = sol.dim();
  const int J = sol.components;
  for (int k = 0; k < d; ++k)
    f << "x" << k + 1 << ",";
  f << "a";
  for (int j = 1; j < J; ++j)
    f << ",Y" << j;
  for (int j = 0; j < J; ++j)
    for (int k = 0; k < d; ++k)
      f << ",d" << k + 1 << (j == 0 ? std::string("a") : "Y" + std::to_string(j));
  f << "\n";
  const auto &v = sol.values[static_cast<std::size_t>(time_index)];
  const auto &g = sol.gradients[static_cast<std::size_t>(time_index)];
  for (Index p = 0; p < v.rows(); ++p) {
    const VectorXd x = sol.grid.node(p);
    for (int k = 0; k < d; ++k)
      f << format_double(x(k)) << ",";
    for (int j = 0; j < J; ++j)
      f << (j ? "," : "") << format_double(v(p, j));
    for (Index c = 0; c < g.cols(); ++c)
      f << "," << format_double(g(p, c));
    f << "\n";
  }
}

void write_paths_csv(const std::string &path, const std::vector<StrategyPath> &paths) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f)
    throw InvalidInput("cannot write " + path);
  if (paths.empty())
    return;
  const Index d = paths.front().state.front().size();
  const Index I = paths.front().X.cols();
  f << "path,t";
  for (Index k = 0; k < d; ++k)
    f << ",xi" << k + 1;
  f << ",A";
  for (Index i = 0; i < I; ++i)
    f << ",X" << i + 1 << ",pi" << i + 1 << ",c" << i + 1;
  f << "\n";
  for (const auto &p : paths) {
    for (std::size_t k = 0; k < p.times.size(); ++k) {
      const auto kk = static_cast<Index>(k);
      f << p.path_id << "," << format_double(p.times[k]);
      for (Index j = 0; j < d; ++j)
        f << "," << format_double(p.state[k](j));
      f << "," << format_double(p.A(kk));
      for (Index i = 0; i < I; ++i)
        f << "," << format_double(p.X(kk, i)) << "," << format_double(p.pi(kk, i)) << ","
          << format_double(p.c(kk, i));
      f << "\n";
    }
  }
}

} // namespace radner
