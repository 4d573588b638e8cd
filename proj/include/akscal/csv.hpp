#pragma once

// CSV tables: exact rationals as "p/q", doubles with 17 significant digits,
// so equal inputs give byte-identical files.

#include "akscal/error.hpp"
#include "akscal/rational.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace akscal::csv {

inline std::string cell(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string cell(const Rational& v) { return toString(v); }
inline std::string cell(int v) { return std::to_string(v); }
inline std::string cell(long v) { return std::to_string(v); }
inline std::string cell(std::size_t v) { return std::to_string(v); }
inline std::string cell(bool v) { return v ? "true" : "false"; }
inline std::string cell(const std::string& v) { return v; }
inline std::string cell(const char* v) { return v; }

/// Quotes fields containing separators, quotes or line breaks.
inline std::string escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

  template <class... T>
  void row(const T&... values) {
    if (sizeof...(T) != header_.size()) throw Error("cli", "csv", "row width does not match the header");
    rows_.push_back({cell(values)...});
  }

  void raw(std::vector<std::string> cells) {
    if (cells.size() != header_.size()) throw Error("cli", "csv", "row width does not match the header");
    rows_.push_back(std::move(cells));
  }

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  void write(std::ostream& os) const {
    line(os, header_);
    for (const auto& r : rows_) line(os, r);
  }

  std::string str() const {
    std::ostringstream ss;
    write(ss);
    return ss.str();
  }

  void save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cli", "output", "cannot write '" + path + "'");
    write(f);
  }

 private:
  static void line(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << escape(cells[i]);
    os << '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace akscal::csv
