#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "srkde/dataset.hpp"

namespace srkde {

struct ParsedCsv {
  Dataset data;
  std::vector<std::string> labels;  // empty when there is no label column
  bool has_labels = false;
};

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t begin = 0;
  while (true) {
    const std::size_t comma = line.find(',', begin);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(begin));
      return fields;
    }
    fields.push_back(line.substr(begin, comma - begin));
    begin = comma + 1;
  }
}

inline double parse_double_strict(std::string_view token, const std::string& path,
                                  std::size_t line_no) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw std::runtime_error(path + " line " + std::to_string(line_no) +
                             ": \"" + std::string(token) +
                             "\" is not a number");
  }
  if (!std::isfinite(value)) {
    throw std::runtime_error(path + " line " + std::to_string(line_no) +
                             ": non-finite value \"" + std::string(token) +
                             "\"");
  }
  return value;
}

}  // namespace detail

/// Reads a dataset file: header `x1,...,xm` with an optional trailing
/// `label` column, one point per row.  Ragged rows and non-finite values
/// are rejected with the offending line number.
inline ParsedCsv read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error(path + ": empty file");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = detail::split_csv_line(line);
  bool has_labels = false;
  if (!header.empty() && header.back() == "label") {
    has_labels = true;
    header.pop_back();
  }
  const std::size_t dim = header.size();
  for (std::size_t d = 0; d < dim; ++d) {
    const std::string expected = "x" + std::to_string(d + 1);
    if (header[d] != expected) {
      throw std::runtime_error(path + " line 1: expected column \"" +
                               expected + "\", found \"" +
                               std::string(header[d]) + "\"");
    }
  }
  if (dim == 0) {
    throw std::runtime_error(path + " line 1: no coordinate columns");
  }

  std::vector<double> values;
  std::vector<std::string> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    const std::size_t expected = dim + (has_labels ? 1 : 0);
    if (fields.size() != expected) {
      throw std::runtime_error(path + " line " + std::to_string(line_no) +
                               ": expected " + std::to_string(expected) +
                               " fields, found " +
                               std::to_string(fields.size()));
    }
    for (std::size_t d = 0; d < dim; ++d) {
      values.push_back(detail::parse_double_strict(fields[d], path, line_no));
    }
    if (has_labels) {
      if (fields[dim].empty()) {
        throw std::runtime_error(path + " line " + std::to_string(line_no) +
                                 ": empty label");
      }
      labels.emplace_back(fields[dim]);
    }
  }
  if (values.empty()) {
    throw std::runtime_error(path + ": no data rows");
  }
  return ParsedCsv{Dataset(dim, std::move(values)), std::move(labels),
                   has_labels};
}

/// 17 significant digits: enough for double round trips.
inline std::string format_double(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

inline void write_dataset_csv(const std::string& path, const Dataset& data,
                              const std::vector<std::string>* labels = nullptr) {
  if (labels && labels->size() != data.size()) {
    throw std::invalid_argument("label count does not match point count");
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (std::size_t d = 0; d < data.dimension(); ++d) {
    if (d) out << ',';
    out << 'x' << d + 1;
  }
  if (labels) out << ",label";
  out << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto p = data.point(i);
    for (std::size_t d = 0; d < data.dimension(); ++d) {
      if (d) out << ',';
      out << format_double(p[d]);
    }
    if (labels) out << ',' << (*labels)[i];
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace srkde
