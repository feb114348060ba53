#pragma once

#include <string>
#include <vector>

namespace metastab {

/// Shortest round-trip decimal form ("nan", "inf", "-inf" for non-finite values).
std::string format_double(double v);
/// Inverse of format_double. Throws CorruptionError on malformed input.
double parse_double(const std::string& s);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws CorruptionError if absent.
  std::size_t column(const std::string& name) const;
};

/// Fields containing ',', '"' or newlines are quoted.
std::string to_csv(const CsvTable& table);
CsvTable parse_csv(const std::string& text);

/// Throws IoError on failure.
void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace metastab
