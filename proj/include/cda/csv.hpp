#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cda {

// Floats are written with 12 significant digits, lines end with LF.
inline std::string csv_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open for writing: " + path);
  }

  void raw_row(const std::string& line) { out_ << line << '\n'; }

  template <typename... Cells>
  void row(const Cells&... cells) {
    std::string line;
    ((append(line, cells)), ...);
    if (!line.empty()) line.pop_back();  // trailing comma
    out_ << line << '\n';
    if (!out_) throw std::runtime_error("write failed: " + path_);
  }

  void close() {
    out_.close();
    if (!out_) throw std::runtime_error("write failed: " + path_);
  }

 private:
  static void append(std::string& line, double v) {
    line += csv_double(v);
    line += ',';
  }
  static void append(std::string& line, int v) {
    line += std::to_string(v);
    line += ',';
  }
  static void append(std::string& line, std::uint64_t v) {
    line += std::to_string(v);
    line += ',';
  }
  static void append(std::string& line, long long v) {
    line += std::to_string(v);
    line += ',';
  }
  static void append(std::string& line, const char* v) {
    line += v;
    line += ',';
  }
  static void append(std::string& line, const std::string& v) {
    line += v;
    line += ',';
  }

  std::string path_;
  std::ofstream out_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw std::runtime_error("csv column not found: " + name);
  }
};

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (first) {
      table.header = std::move(cells);
      first = false;
    } else {
      table.rows.push_back(std::move(cells));
    }
  }
  return table;
}

}  // namespace cda
