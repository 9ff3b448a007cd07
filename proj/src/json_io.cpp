#include "radner/json_io.hpp"

#include "radner/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace radner {

namespace {

void indent(std::string &out, int level) { out.append(static_cast<std::size_t>(2 * level), ' '); }

void write(const Json &v, std::string &out, int level) {
  switch (v.type()) {
  case Json::value_t::null:
    out += "null";
    return;
  case Json::value_t::boolean:
    out += v.get<bool>() ? "true" : "false";
    return;
  case Json::value_t::number_integer:
    out += std::to_string(v.get<std::int64_t>());
    return;
  case Json::value_t::number_unsigned:
    out += std::to_string(v.get<std::uint64_t>());
    return;
  case Json::value_t::number_float: {
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
      out += "null";
      return;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", d);
    out += buf;
    return;
  }
  case Json::value_t::string:
    out += v.dump();
    return;
  case Json::value_t::array: {
    if (v.empty()) {
      out += "[]";
      return;
    }
    out += "[\n";
    bool first = true;
    for (const auto &e : v) {
      if (!first)
        out += ",\n";
      first = false;
      indent(out, level + 1);
      write(e, out, level + 1);
    }
    out += "\n";
    indent(out, level);
    out += "]";
    return;
  }
  case Json::value_t::object: {
    if (v.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    bool first = true;
    for (auto it = v.begin(); it != v.end(); ++it) {
      if (!first)
        out += ",\n";
      first = false;
      indent(out, level + 1);
      out += Json(it.key()).dump();
      out += ": ";
      write(it.value(), out, level + 1);
    }
    out += "\n";
    indent(out, level);
    out += "}";
    return;
  }
  default:
    throw InvalidInput("unsupported JSON value");
  }
}

} // namespace

std::string dump_json(const Json &doc) {
  std::string out;
  write(doc, out, 0);
  out += "\n";
  return out;
}

void write_json_file(const std::string &path, const Json &doc) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f)
    throw InvalidInput("cannot write " + path);
  f << dump_json(doc);
}

Json read_json_file(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw InvalidInput("cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return Json::parse(ss.str());
}

} // namespace radner
