#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "ulacert/common.hpp"

namespace ulacert {

// Minimal deterministic CSV writer: shortest-roundtrip doubles, LF endings.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(const std::vector<double>& row) {
    if (row.size() != header_.size()) throw ConfigError("csv: row width mismatch");
    rows_.push_back(row);
  }

  void write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("csv: cannot open " + path);
    for (size_t i = 0; i < header_.size(); ++i) out << (i ? "," : "") << header_[i];
    out << "\n";
    char buf[64];
    for (const auto& row : rows_) {
      for (size_t i = 0; i < row.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", row[i]);
        out << (i ? "," : "") << buf;
      }
      out << "\n";
    }
  }

  size_t size() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<double>> rows_;
};

}  // namespace ulacert
