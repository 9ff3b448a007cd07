#include "helpers.hpp"

#include "radner/container.hpp"
#include "radner/errors.hpp"
#include "radner/json_io.hpp"
#include "radner/pde_solver.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace radner;
using namespace radner::testing;

namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string &name) {
  const fs::path d = fs::temp_directory_path() / ("radner_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path &p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

} // namespace

TEST(Json, FixedFormatting) {
  Json j;
  j["b"] = 0.1;
  j["a"] = {1, 2};
  j["nan"] = std::numeric_limits<double>::quiet_NaN();
  j["s"] = "x\"y";
  j["empty"] = Json::array();
  const std::string out = dump_json(j);
  EXPECT_EQ(out, "{\n  \"b\": 0.10000000000000001,\n  \"a\": [\n    1,\n    2\n  ],\n"
                 "  \"nan\": null,\n  \"s\": \"x\\\"y\",\n  \"empty\": []\n}\n");
  EXPECT_EQ(dump_json(Json::parse(out)), out);
}

TEST(Container, RoundTrip) {
  const auto dyn = brownian();
  const auto econ = economy({{1.0, "affine:0,0.2", 0.5}, {2.0, "constant:0.1", 0.5}}, dyn);
  auto sol = solve_backward(econ, dyn, Driver::full(econ), grid1d(20, 8));
  sol.meta.fingerprint = "0123456789abcdef";
  const fs::path dir = temp_dir("container");
  const std::string path = (dir / "s.radn").string();
  write_solution(path, sol, {{"note", "x"}});
  const auto back = read_solution(path);
  EXPECT_EQ(back.sol.meta.fingerprint, sol.meta.fingerprint);
  EXPECT_EQ(back.sol.meta.driver, "full");
  EXPECT_EQ(back.header["extra"]["note"], "x");
  ASSERT_EQ(back.sol.values.size(), sol.values.size());
  for (std::size_t n = 0; n < sol.values.size(); ++n) {
    EXPECT_EQ((back.sol.values[n] - sol.values[n]).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ((back.sol.gradients[n] - sol.gradients[n]).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Container, RejectsForeignFiles) {
  const fs::path dir = temp_dir("foreign");
  std::ofstream(dir / "junk.radn") << "not a solution";
  EXPECT_THROW(read_solution((dir / "junk.radn").string()), InvalidInput);
  EXPECT_THROW(read_solution((dir / "missing.radn").string()), InvalidInput);
}

TEST(Container, CsvSlice) {
  const auto dyn = brownian();
  const auto econ = economy({{1.0, "zero", 1.0}}, dyn);
  const auto sol = solve_backward(econ, dyn, Driver::full(econ), grid1d(10, 4));
  const fs::path dir = temp_dir("csv");
  write_csv_slice((dir / "s.csv").string(), sol, 0);
  const std::string text = slurp(dir / "s.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), "x1,a,Y1,d1a,d1Y1");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 6);
}

TEST(Format, SeventeenDigits) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(2.0), "2");
}
