#pragma once

#include <string>
#include <vector>

namespace twolip {

/// Minimal CSV table with `# key=value` provenance comments above the
/// header row. Values are stored as strings; numeric helpers format with
/// enough digits to round-trip doubles exactly.
struct CsvTable {
  std::vector<std::string> comments;  // without the leading "# "
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_comment(const std::string& key, const std::string& value);
  std::size_t column_index(const std::string& name) const;

  std::string to_string() const;
  void write(const std::string& path) const;
  static CsvTable read(const std::string& path);
};

std::string format_double(double v);
std::string format_u64(unsigned long long v);

}  // namespace twolip
