#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace radner {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
public:
  using Error::Error;
};

class SingularEndowment : public Error {
public:
  using Error::Error;
};

/// A solution value left the admissible range during backward stepping.
class DivergenceError : public Error {
public:
  DivergenceError(int time_index, std::ptrdiff_t node, int component, double value,
                  const std::string &what)
      : Error(what), time_index(time_index), node(node), component(component), value(value) {}

  int time_index;
  std::ptrdiff_t node;
  int component;
  double value;
};

class SchemeError : public Error {
public:
  using Error::Error;
};

class NonContraction : public Error {
public:
  NonContraction(double factor, double suggested_beta, const std::string &what)
      : Error(what), factor(factor), suggested_beta(suggested_beta) {}

  double factor;
  double suggested_beta;
};

class OracleScaleError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  ConfigError(int line, const std::string &what) : Error(what), line(line) {}
  int line; // 0 when unknown
};

class FingerprintMismatch : public Error {
public:
  using Error::Error;
};

class UnsupportedOracle : public Error {
public:
  using Error::Error;
};

} // namespace radner
