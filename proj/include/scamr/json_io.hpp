#pragma once

#include <cmath>
#include <cstdio>
#include <string>

#include <json.hpp>

namespace scamr {

using Json = nlohmann::json;

namespace detail {

inline void dump_to(const Json& j, std::string& out, int indent, int level) {
  auto newline = [&](int lvl) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * lvl), ' ');
  };
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(level + 1);
        out += Json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        dump_to(it.value(), out, indent, level + 1);
      }
      newline(level);
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += indent < 0 ? "," : ", ";
        first = false;
        dump_to(v, out, -1, 0);
      }
      out += ']';
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace detail

/// Serializes with every double printed to 17 significant digits. Arrays are
/// kept on one line; objects are indented when `indent >= 0`.
inline std::string dump_json(const Json& j, int indent = -1) {
  std::string out;
  detail::dump_to(j, out, indent, 0);
  return out;
}

}  // namespace scamr
