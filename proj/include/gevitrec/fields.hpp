#pragma once

#include <algorithm>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "gevitrec/csv.hpp"
#include "gevitrec/dataset.hpp"
#include "gevitrec/error.hpp"
#include "gevitrec/text.hpp"

namespace gevitrec {

enum class FieldKind { Numeric, NonNumeric };

constexpr std::string_view to_string(FieldKind k) {
  return k == FieldKind::Numeric ? "numeric" : "non-numeric";
}

inline FieldKind parse_field_kind(std::string_view s) {
  if (s == "numeric") return FieldKind::Numeric;
  if (s == "non-numeric") return FieldKind::NonNumeric;
  throw Error(ErrorCode::ParseError, "unknown field kind '" + std::string(s) + "'");
}

/// Identity of an exploded field: names are only unique within one source.
struct FieldRef {
  std::string source_id;
  std::string name;

  auto operator<=>(const FieldRef&) const = default;
  bool operator==(const FieldRef&) const = default;
};

struct Field {
  std::string name;
  std::string source_id;
  DataType source_type = DataType::Tabular;
  FieldKind kind = FieldKind::NonNumeric;
  std::size_t cardinality = 0;       // non-numeric only
  std::vector<std::string> values;   // sorted distinct trimmed values, non-numeric only
  std::size_t row_count = 0;         // records in the source, missing included
  bool is_key = false;               // the source's implicit identifier
  std::vector<std::string> samples;  // first distinct non-missing values, in record order

  FieldRef ref() const { return {source_id, name}; }
  bool numeric() const { return kind == FieldKind::Numeric; }
};

struct FieldClassification {
  FieldKind kind;
  std::size_t cardinality;  // 0 for numeric
};

/// Numeric iff every non-missing value parses as a decimal number.
inline FieldClassification classify_field(std::span<const std::string> raw_values) {
  std::set<std::string_view> distinct;
  bool all_numeric = true;
  bool any_present = false;
  for (const auto& raw : raw_values) {
    if (text::is_missing(raw)) continue;
    any_present = true;
    auto v = text::trim(raw);
    distinct.insert(v);
    if (all_numeric && !text::parse_number(v)) all_numeric = false;
  }
  if (!any_present) throw Error(ErrorCode::AllMissing, "every value is a missing marker");
  if (all_numeric) return {FieldKind::Numeric, 0};
  return {FieldKind::NonNumeric, distinct.size()};
}

inline constexpr std::size_t kMetadataSamples = 5;

struct FieldMetadataEntry {
  std::string field;
  std::string source;
  FieldKind kind = FieldKind::NonNumeric;
  std::size_t cardinality = 0;
  std::vector<std::string> sample_values;

  bool operator==(const FieldMetadataEntry&) const = default;
};

struct FieldMetadata {
  std::vector<FieldMetadataEntry> entries;

  // sample_values are joined with '|'; cardinality is blank for numeric fields.
  std::string to_csv() const {
    std::vector<csv::Row> rows;
    for (const auto& e : entries) {
      std::string samples;
      for (std::size_t i = 0; i < e.sample_values.size(); ++i) {
        if (i) samples += '|';
        samples += e.sample_values[i];
      }
      rows.push_back({e.field, e.source, std::string(to_string(e.kind)),
                      e.kind == FieldKind::Numeric ? std::string() : std::to_string(e.cardinality),
                      samples});
    }
    return csv::write({"field", "source", "kind", "cardinality", "sample_values"}, rows);
  }

  static FieldMetadata from_csv(std::string_view src) {
    auto table = csv::parse(src, "field metadata");
    if (table.header != csv::Row{"field", "source", "kind", "cardinality", "sample_values"}) {
      throw Error(ErrorCode::ParseError, "field metadata: unexpected header");
    }
    FieldMetadata md;
    for (const auto& row : table.rows) {
      FieldMetadataEntry e;
      e.field = row[0];
      e.source = row[1];
      e.kind = parse_field_kind(row[2]);
      e.cardinality = row[3].empty() ? 0 : std::stoul(row[3]);
      std::string_view rest = row[4];
      while (!rest.empty()) {
        auto bar = rest.find('|');
        e.sample_values.emplace_back(rest.substr(0, bar));
        if (bar == std::string_view::npos) break;
        rest.remove_prefix(bar + 1);
      }
      md.entries.push_back(std::move(e));
    }
    return md;
  }
};

/// Builds a Field from one record-table column. Throws AllMissing via
/// classify_field when the column is empty of data.
inline Field make_field(const Dataset& ds, std::size_t column) {
  const auto& raw = ds.records.cells[column];
  Field f;
  f.name = ds.records.columns[column];
  f.source_id = ds.id;
  f.source_type = ds.dtype;
  f.row_count = ds.records.record_count;
  f.is_key = ds.records.key_column == column;
  auto cls = classify_field(raw);
  f.kind = cls.kind;
  std::set<std::string> seen;
  for (const auto& r : raw) {
    if (text::is_missing(r)) continue;
    std::string v(text::trim(r));
    if (seen.insert(v).second && f.samples.size() < kMetadataSamples) f.samples.push_back(v);
  }
  if (f.kind == FieldKind::NonNumeric) {
    f.values.assign(seen.begin(), seen.end());
    f.cardinality = f.values.size();
  }
  return f;
}

struct ExplodedFields {
  std::vector<Field> fields;
  FieldMetadata metadata;
};

/// Extracts every attribute field of every dataset, sorted by (source_id, name).
/// Columns holding only missing markers are skipped.
inline ExplodedFields explode_fields(std::span<const Dataset> datasets) {
  std::set<std::string> ids;
  for (const auto& ds : datasets) {
    if (!ids.insert(ds.id).second) {
      throw Error(ErrorCode::DuplicateDatasetId, "dataset id '" + ds.id + "' is used twice");
    }
  }
  ExplodedFields out;
  for (const auto& ds : datasets) {
    for (std::size_t c = 0; c < ds.records.columns.size(); ++c) {
      try {
        out.fields.push_back(make_field(ds, c));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::AllMissing) throw;
      }
    }
  }
  std::sort(out.fields.begin(), out.fields.end(), [](const Field& a, const Field& b) {
    return std::tie(a.source_id, a.name) < std::tie(b.source_id, b.name);
  });
  for (const auto& f : out.fields) {
    out.metadata.entries.push_back({f.name, f.source_id, f.kind, f.cardinality, f.samples});
  }
  return out;
}

}  // namespace gevitrec
