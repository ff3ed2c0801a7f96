#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "erepi/error.hpp"
#include "erepi/format.hpp"

namespace erepi::io {

// ---- CSV -----------------------------------------------------------------

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

class CsvCell {
 public:
  CsvCell(const std::string& s) : text_(s) {}
  CsvCell(const char* s) : text_(s) {}
  CsvCell(double v) : text_(std::isnan(v) ? std::string() : format_double(v)) {}
  CsvCell(bool v) : text_(v ? "true" : "false") {}
  template <class T>
    requires std::is_integral_v<T>
  CsvCell(T v) : text_(std::to_string(v)) {}
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

// Header row plus data rows; '\n' line endings, '.' decimal separator, NaN
// written as an empty field.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

  void row(std::initializer_list<CsvCell> cells) { row(std::vector<CsvCell>(cells)); }

  void row(const std::vector<CsvCell>& cells) {
    require(cells.size() == header_.size(), ErrorKind::Format, "CSV row width differs from header");
    std::vector<std::string> r;
    r.reserve(cells.size());
    for (const auto& c : cells) r.push_back(c.text());
    rows_.push_back(std::move(r));
  }

  std::string str() const {
    std::string out;
    append_line(out, header_);
    for (const auto& r : rows_) append_line(out, r);
    return out;
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream os(path, std::ios::binary);
    require(static_cast<bool>(os), ErrorKind::FileNotFound, "cannot write " + path.string());
    os << str();
  }

 private:
  static void append_line(std::string& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += csv_field(fields[i]);
    }
    out += '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Reader for the CSV files this tool writes (RFC 4180 quoting, one record per line).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw Error(ErrorKind::Format, "CSV has no column '" + name + "'");
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c != '"') cur += c;
      else if (i + 1 < line.size() && line[i + 1] == '"') cur += line[++i];
      else quoted = false;
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  require(!quoted, ErrorKind::Format, "unterminated quote in CSV line");
  out.push_back(std::move(cur));
  return out;
}

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), ErrorKind::FileNotFound, "missing input " + path.string());
  CsvTable t;
  std::string line;
  require(static_cast<bool>(std::getline(is, line)), ErrorKind::Format, "empty CSV " + path.string());
  t.header = split_csv_line(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split_csv_line(line));
    require(t.rows.back().size() == t.header.size(), ErrorKind::Format,
            "ragged CSV row in " + path.string());
  }
  return t;
}

// ---- parameter grids -------------------------------------------------------

// The p values of the component-structure table for n = 10^4.
inline std::vector<double> table1_grid() {
  return {0.00001, 0.00005, 0.000075, 0.0001,  0.000125, 0.00015, 0.0002,
          0.00025, 0.0003,  0.00035,  0.0004, 0.0009,   0.001};
}

// count values from lo to hi, evenly spaced in log p.
inline std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  require(lo > 0.0 && hi >= lo, ErrorKind::InvalidParameter, "log grid needs 0 < lo <= hi");
  require(count >= 1, ErrorKind::InvalidParameter, "log grid needs at least one point");
  if (count == 1) return {lo};
  std::vector<double> out;
  const double ratio = std::log(hi / lo);
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(i + 1 == count ? hi : lo * std::exp(ratio * static_cast<double>(i) / static_cast<double>(count - 1)));
  return out;
}

/// Parses "a,b,c", "log:lo:hi:count" or "table1".
inline std::string trimmed(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

inline std::vector<double> parse_grid(const std::string& spec) {
  if (spec == "table1") return table1_grid();
  std::vector<std::string> parts;
  if (spec.rfind("log:", 0) == 0) {
    std::istringstream ss(spec.substr(4));
    std::string part;
    while (std::getline(ss, part, ':')) parts.push_back(trimmed(part));
    require(parts.size() == 3, ErrorKind::InvalidParameter, "log grid is log:lo:hi:count, got '" + spec + "'");
    return log_grid(parse_double(parts[0]), parse_double(parts[1]), parse_u64(parts[2]));
  }
  std::vector<double> out;
  std::istringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(parse_double(trimmed(part)));
  require(!out.empty(), ErrorKind::InvalidParameter, "empty grid");
  for (double p : out) require(p >= 0.0 && p <= 1.0, ErrorKind::InvalidParameter, "grid value outside [0, 1]");
  return out;
}

inline std::vector<std::size_t> parse_counts(const std::string& spec) {
  std::vector<std::size_t> out;
  std::istringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(static_cast<std::size_t>(parse_u64(trimmed(part))));
  require(!out.empty(), ErrorKind::InvalidParameter, "empty list");
  return out;
}

}  // namespace erepi::io
