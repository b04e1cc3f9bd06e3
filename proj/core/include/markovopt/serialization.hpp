#pragma once

#include <filesystem>
#include <string>

#include "markovopt/run_record.hpp"

namespace markovopt {

/// Shortest round-trip decimal with 17 significant digits ("%.17g").
std::string format_double(double value);

/// Header "k,oracle_calls,<metric>..." then one row per recorded iteration.
std::string csv_string(const RunRecord& record);
void write_csv(const RunRecord& record, const std::filesystem::path& path);
/// Reads a CSV written by write_csv; metric columns are resolved by name.
RunRecord read_csv(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace markovopt
