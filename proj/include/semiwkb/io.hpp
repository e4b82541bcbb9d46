#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace semiwkb::io {

// CSV with a trailing config_hash column on every row. Numbers are written
// with 17 significant digits so reports round-trip exactly.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> columns, std::string hash);
  void row(const std::vector<double>& values);
  // Mixed rows: cells already formatted.
  void row_cells(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
  std::size_t width_;
  std::string hash_;
};

std::string format_number(double x);

// One JSON object per line; each gets "config_hash".
class JsonLinesWriter {
 public:
  JsonLinesWriter(const std::filesystem::path& path, std::string hash);
  void write(nlohmann::json record);

 private:
  std::ofstream out_;
  std::string hash_;
};

// Pretty JSON document with "config_hash" added at the top level.
void write_json(const std::filesystem::path& path, nlohmann::json doc, const std::string& hash);

// Rows of a CSV written by CsvWriter whose hash column differs from `hash`.
std::size_t count_hash_mismatches(const std::filesystem::path& path, const std::string& hash);

}  // namespace semiwkb::io
