#pragma once

// Minimal RFC 4180 style reader/writer helpers shared by the file readers.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "co2fuse/error.hpp"

namespace co2fuse::csv {

/// Splits one physical line into fields. Quoted fields may contain commas and
/// doubled quotes; embedded newlines are not supported. Returns false on an
/// unterminated quote.
inline bool split_line(std::string_view line, std::vector<std::string>& out) {
  out.clear();
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::string field;
  bool quoted = false;
  bool field_was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
      field_was_quoted = false;
    } else if (c == '"' && field.empty() && !field_was_quoted) {
      quoted = true;
      field_was_quoted = true;
    } else {
      field.push_back(c);
    }
  }
  if (quoted) return false;
  out.push_back(std::move(field));
  return true;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<double> parse_finite(std::string_view s) {
  auto v = parse_double(s);
  if (!v || !std::isfinite(*v)) return std::nullopt;
  return v;
}

inline std::optional<long long> parse_int(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

/// Shortest text that parses back to the identical double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string quote_if_needed(std::string_view s) {
  if (s.find_first_of(",\"") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

/// Maps required column names onto their positions in a header row.
class Header {
 public:
  Header(const std::vector<std::string>& fields, const std::vector<std::string_view>& required,
         std::string_view file_label) {
    indices_.reserve(required.size());
    for (auto name : required) {
      std::size_t found = fields.size();
      for (std::size_t i = 0; i < fields.size(); ++i) {
        std::string_view f = trim(fields[i]);
        // tolerate a UTF-8 byte order mark on the first column
        if (i == 0 && f.size() >= 3 && f.substr(0, 3) == "\xEF\xBB\xBF") f.remove_prefix(3);
        if (f == name) {
          found = i;
          break;
        }
      }
      if (found == fields.size()) {
        throw Error(ErrorKind::Schema, std::string(file_label) + ": missing required column '" +
                                           std::string(name) + "'");
      }
      indices_.push_back(found);
    }
  }

  std::size_t operator[](std::size_t i) const { return indices_[i]; }
  std::size_t max_index() const {
    std::size_t m = 0;
    for (auto i : indices_) m = std::max(m, i);
    return m;
  }

 private:
  std::vector<std::size_t> indices_;
};

/// Reads the header line; throws schema-error on an empty stream.
inline std::vector<std::string> read_header(std::istream& in, std::string_view file_label) {
  std::string line;
  std::vector<std::string> fields;
  if (!std::getline(in, line) || !split_line(line, fields)) {
    throw Error(ErrorKind::Schema, std::string(file_label) + ": missing header row");
  }
  return fields;
}

inline bool is_blank(std::string_view line) {
  for (char c : line) {
    if (c != ' ' && c != '\t' && c != '\r') return false;
  }
  return true;
}

}  // namespace co2fuse::csv
