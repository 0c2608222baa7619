#pragma once

// RFC-4180 CSV reader/writer: comma separated, double-quote escaping,
// embedded commas/quotes/newlines supported, header row mandatory.
// The writer always emits '\n' line endings so output bytes are stable.

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "veritrans/errors.hpp"

namespace veritrans {

using CsvRow = std::vector<std::string>;

struct CsvTable {
  CsvRow header;
  std::vector<CsvRow> rows;

  // Column index for a header name, or npos.
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return npos;
  }
};

namespace detail {

// Splits raw CSV text into records of fields. Quotes must cover whole fields;
// a lone '"' inside a quoted field escapes as "".
inline std::vector<CsvRow> parse_csv_records(std::string_view text) {
  std::vector<CsvRow> records;
  CsvRow row;
  std::string field;
  bool quoted = false;
  bool any_data = false;

  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          i += 2;
          continue;
        }
        quoted = false;
        ++i;
        continue;
      }
      field += c;
      ++i;
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        any_data = true;
        ++i;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        any_data = true;
        ++i;
        break;
      case '\r':
        ++i;
        break;
      case '\n':
        row.push_back(std::move(field));
        field.clear();
        records.push_back(std::move(row));
        row.clear();
        any_data = false;
        ++i;
        break;
      default:
        field += c;
        any_data = true;
        ++i;
        break;
    }
  }
  if (quoted) throw FormatError("unterminated quoted CSV field");
  if (any_data || !field.empty() || !row.empty()) {
    row.push_back(std::move(field));
    records.push_back(std::move(row));
  }
  return records;
}

}  // namespace detail

inline CsvTable read_csv(std::string_view text) {
  auto records = detail::parse_csv_records(text);
  if (records.empty()) throw FormatError("CSV input has no header row");
  CsvTable table;
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      throw FormatError("CSV row " + std::to_string(r) + " has " + std::to_string(records[r].size()) +
                        " fields, header has " + std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

inline CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open CSV file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return read_csv(buf.str());
}

inline std::string csv_escape(std::string_view field) {
  const bool needs_quotes = field.find_first_of(",\"\n\r") != std::string_view::npos;
  if (!needs_quotes) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

inline void write_csv(std::ostream& out, const CsvTable& table) {
  auto write_row = [&out](const CsvRow& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << csv_escape(row[i]);
    }
    out << '\n';
  };
  write_row(table.header);
  for (const auto& row : table.rows) write_row(row);
}

inline void write_csv_file(const std::string& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open CSV file for writing: " + path);
  write_csv(out, table);
}

}  // namespace veritrans
