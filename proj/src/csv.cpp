#include "twolip/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace twolip {

std::string format_double(double v) {
  // Shortest representation that parses back to the same double.
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc())
    throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

std::string format_u64(unsigned long long v) { return std::to_string(v); }

void CsvTable::add_comment(const std::string& key, const std::string& value) {
  comments.push_back(key + "=" + value);
}

std::size_t CsvTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw std::out_of_range("csv: no column named " + name);
}

namespace {

// Cells with commas or quotes are quoted; newlines inside cells are not
// supported (tables here are strictly one line per row).
void append_cell(std::ostringstream& out, const std::string& cell) {
  if (cell.find_first_of(",\"\n\r") == std::string::npos) {
    out << cell;
    return;
  }
  if (cell.find_first_of("\n\r") != std::string::npos)
    throw std::invalid_argument("csv: cell contains a line break");
  out << '"';
  for (char c : cell) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
    } else if (c == '"' && cell.empty()) {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell += c;
    }
  }
  if (quoted) throw std::runtime_error("csv: unterminated quoted cell");
  cells.push_back(std::move(cell));
  return cells;
}

}  // namespace

std::string CsvTable::to_string() const {
  std::ostringstream out;
  for (const auto& c : comments) out << "# " << c << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) {
    append_cell(out, columns[i]);
    out << (i + 1 < columns.size() ? "," : "");
  }
  out << "\n";
  for (const auto& row : rows) {
    if (row.size() != columns.size())
      throw std::logic_error("csv: row width disagrees with header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      append_cell(out, row[i]);
      out << (i + 1 < row.size() ? "," : "");
    }
    out << "\n";
  }
  return out.str();
}

void CsvTable::write(const std::string& path) const {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("csv: cannot open " + path + " for writing");
  file << to_string();
  if (!file) throw std::runtime_error("csv: write to " + path + " failed");
}

CsvTable CsvTable::read(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("csv: cannot open " + path);
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(file, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::size_t start = line.size() > 1 && line[1] == ' ' ? 2 : 1;
      table.comments.push_back(line.substr(start));
      continue;
    }
    std::vector<std::string> cells = split_cells(line);
    if (!have_header) {
      table.columns = std::move(cells);
      have_header = true;
    } else {
      table.rows.push_back(std::move(cells));
    }
  }
  return table;
}

}  // namespace twolip
