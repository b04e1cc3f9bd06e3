#include "markovopt/serialization.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "markovopt/error.hpp"

namespace markovopt {

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string csv_string(const RunRecord& record) {
  std::string out = "k,oracle_calls";
  for (Metric m : record.metrics) out += "," + metric_name(m);
  out += "\n";
  for (std::size_t row = 0; row < record.rows(); ++row) {
    out += std::to_string(record.iteration[row]);
    out += ",";
    out += std::to_string(record.oracle_calls[row]);
    for (const auto& column : record.values) {
      out += ",";
      out += format_double(column[row]);
    }
    out += "\n";
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error("cannot open " + path.string() + " for writing");
  file << text;
  if (!file) throw Error("write to " + path.string() + " failed");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return buffer.str();
}

void write_csv(const RunRecord& record, const std::filesystem::path& path) {
  write_text(path, csv_string(record));
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  return cells;
}

}  // namespace

RunRecord read_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line)) throw Error(path.string() + ": empty CSV");
  const auto header = split(line);
  if (header.size() < 2 || header[0] != "k" || header[1] != "oracle_calls") {
    throw Error(path.string() + ": unexpected CSV header");
  }
  RunRecord record;
  for (std::size_t i = 2; i < header.size(); ++i) {
    record.metrics.push_back(metric_from_name(header[i]));
  }
  record.values.resize(record.metrics.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw Error(path.string() + ": ragged CSV row");
    }
    record.iteration.push_back(std::stoull(cells[0]));
    record.oracle_calls.push_back(std::stoull(cells[1]));
    for (std::size_t i = 2; i < cells.size(); ++i) {
      record.values[i - 2].push_back(std::stod(cells[i]));
    }
  }
  if (!record.oracle_calls.empty()) {
    record.total_oracle_calls = record.oracle_calls.back();
  }
  return record;
}

}  // namespace markovopt
