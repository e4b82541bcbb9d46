#include "semiwkb/io.hpp"

#include <cmath>
#include <cstdio>

#include "semiwkb/error.hpp"

namespace semiwkb::io {

namespace {

std::ofstream open(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ParameterError("cannot write " + path.string());
  return out;
}

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> columns,
                     std::string hash)
    : out_(open(path)), width_(columns.size()), hash_(std::move(hash)) {
  for (const auto& c : columns) out_ << c << ',';
  out_ << "config_hash\n";
}

void CsvWriter::row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_number(v));
  row_cells(cells);
}

void CsvWriter::row_cells(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw ContractError("csv row width does not match the header");
  for (const auto& c : cells) out_ << c << ',';
  out_ << hash_ << '\n';
}

JsonLinesWriter::JsonLinesWriter(const std::filesystem::path& path, std::string hash)
    : out_(open(path)), hash_(std::move(hash)) {}

void JsonLinesWriter::write(nlohmann::json record) {
  record["config_hash"] = hash_;
  out_ << record.dump() << '\n';
}

void write_json(const std::filesystem::path& path, nlohmann::json doc, const std::string& hash) {
  doc["config_hash"] = hash;
  auto out = open(path);
  out << doc.dump(2) << '\n';
}

std::size_t count_hash_mismatches(const std::filesystem::path& path, const std::string& hash) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot read " + path.string());
  std::string line;
  std::getline(in, line);  // header
  std::size_t bad = 0;
  while (std::getline(in, line)) {
    const auto comma = line.rfind(',');
    const std::string cell = comma == std::string::npos ? line : line.substr(comma + 1);
    if (cell != hash) ++bad;
  }
  return bad;
}

}  // namespace semiwkb::io
