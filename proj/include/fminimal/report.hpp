#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace fminimal {

using Json = nlohmann::ordered_json;

/// Row-oriented table for CSV output.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Json>> rows;

  bool empty() const { return header.empty(); }
};

/// Run output: an ordered JSON document plus an optional tabular view.
struct Report {
  Json document;
  Table table;
};

inline std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  // Keep the value recognizably floating point.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

namespace detail {

inline void write_json_string(std::ostream& out, const std::string& s) { out << Json(s).dump(); }

inline void write_json(std::ostream& out, const Json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out << "{}";
        return;
      }
      out << '{' << nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out << ',' << nl;
        first = false;
        out << pad;
        write_json_string(out, it.key());
        out << (indent > 0 ? ": " : ":");
        write_json(out, it.value(), indent, depth + 1);
      }
      out << nl << close_pad << '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out << "[]";
        return;
      }
      // Flat numeric arrays stay on one line.
      const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_primitive(); });
      if (flat) {
        out << '[';
        for (std::size_t k = 0; k < j.size(); ++k) {
          if (k) out << ", ";
          write_json(out, j[k], 0, 0);
        }
        out << ']';
        return;
      }
      out << '[' << nl;
      for (std::size_t k = 0; k < j.size(); ++k) {
        if (k) out << ',' << nl;
        out << pad;
        write_json(out, j[k], indent, depth + 1);
      }
      out << nl << close_pad << ']';
      return;
    }
    case Json::value_t::number_float:
      out << format_double(j.get<double>());
      return;
    default:
      out << j.dump();
  }
}

inline std::string csv_cell(const Json& v) {
  if (v.is_number_float()) {
    const std::string s = format_double(v.get<double>());
    return s == "null" ? "" : s;
  }
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  if (v.is_null()) return "";
  return v.dump();
}

}  // namespace detail

/// JSON text with every float written with 17 significant digits.
inline std::string to_json_text(const Json& j, int indent = 2) {
  std::ostringstream out;
  detail::write_json(out, j, indent, 0);
  out << '\n';
  return out.str();
}

inline std::string to_csv_text(const Table& t) {
  std::ostringstream out;
  for (std::size_t c = 0; c < t.header.size(); ++c) out << (c ? "," : "") << t.header[c];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << detail::csv_cell(row[c]);
    out << '\n';
  }
  return out.str();
}

}  // namespace fminimal
