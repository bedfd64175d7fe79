#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "gevitrec/error.hpp"

namespace gevitrec::csv {

using Row = std::vector<std::string>;

struct Table {
  Row header;
  std::vector<Row> rows;
};

/// RFC-4180 reader: quoted fields, doubled-quote escapes, embedded newlines,
/// LF or CRLF record separators. A UTF-8 BOM is skipped. Blank lines are dropped.
inline std::vector<Row> parse_records(std::string_view input, std::string_view what = "csv") {
  if (input.substr(0, 3) == "\xEF\xBB\xBF") input.remove_prefix(3);
  std::vector<Row> records;
  Row row;
  std::string cell;
  bool in_quotes = false;
  bool cell_was_quoted = false;
  std::size_t line = 1;
  std::size_t quote_line = 0;

  auto end_cell = [&] {
    row.push_back(std::move(cell));
    cell.clear();
    cell_was_quoted = false;
  };
  auto end_row = [&] {
    end_cell();
    bool blank = row.size() == 1 && row[0].empty();
    if (!blank) records.push_back(std::move(row));
    row.clear();
  };

  for (std::size_t i = 0; i < input.size(); ++i) {
    char c = input[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < input.size() && input[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        cell += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!cell.empty() || cell_was_quoted) {
          throw Error(ErrorCode::ParseError,
                      std::string(what) + ": stray quote at line " + std::to_string(line));
        }
        in_quotes = true;
        cell_was_quoted = true;
        quote_line = line;
        break;
      case ',':
        end_cell();
        break;
      case '\r':
        break;
      case '\n':
        end_row();
        ++line;
        break;
      default:
        if (cell_was_quoted) {
          throw Error(ErrorCode::ParseError, std::string(what) +
                                                 ": text after closing quote at line " +
                                                 std::to_string(line));
        }
        cell += c;
    }
  }
  if (in_quotes) {
    throw Error(ErrorCode::ParseError, std::string(what) + ": unterminated quote opened at line " +
                                           std::to_string(quote_line));
  }
  if (!cell.empty() || !row.empty() || cell_was_quoted) end_row();
  return records;
}

/// Header + rows; every row must have the header's width.
inline Table parse(std::string_view input, std::string_view what = "csv") {
  auto records = parse_records(input, what);
  Table table;
  if (records.empty()) {
    throw Error(ErrorCode::ParseError, std::string(what) + ": empty file (no header)");
  }
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      throw Error(ErrorCode::ParseError, std::string(what) + ": record " + std::to_string(r + 1) +
                                             " has " + std::to_string(records[r].size()) +
                                             " cells, header has " +
                                             std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

inline std::string quote(std::string_view cell) {
  bool needs = cell.find_first_of(",\"\r\n") != std::string_view::npos ||
               (!cell.empty() && (cell.front() == ' ' || cell.back() == ' '));
  if (!needs) return std::string(cell);
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string write(const Row& header, const std::vector<Row>& rows) {
  std::string out;
  auto emit = [&](const Row& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += quote(row[i]);
    }
    out += '\n';
  };
  emit(header);
  for (const auto& row : rows) emit(row);
  return out;
}

}  // namespace gevitrec::csv
