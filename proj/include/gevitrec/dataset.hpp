#pragma once

#include <algorithm>
#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "gevitrec/csv.hpp"
#include "gevitrec/error.hpp"
#include "gevitrec/newick.hpp"
#include "gevitrec/text.hpp"

namespace gevitrec {

enum class DataType { Tabular, Tree, Genomic, Spatial, Network, Image };

inline constexpr std::array<DataType, 6> kAllDataTypes = {
    DataType::Tabular, DataType::Tree,    DataType::Genomic,
    DataType::Spatial, DataType::Network, DataType::Image};

constexpr std::string_view to_string(DataType t) {
  switch (t) {
    case DataType::Tabular: return "tabular";
    case DataType::Tree: return "tree";
    case DataType::Genomic: return "genomic";
    case DataType::Spatial: return "spatial";
    case DataType::Network: return "network";
    case DataType::Image: return "image";
  }
  return "tabular";
}

inline DataType parse_data_type(std::string_view s) {
  for (auto t : kAllDataTypes) {
    if (text::iequals(s, to_string(t))) return t;
  }
  if (text::iequals(s, "table")) return DataType::Tabular;
  throw Error(ErrorCode::InvalidArgument, "unknown data type '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Type-specific payloads

struct Sequence {
  std::string id;
  std::string residues;
};

using Point = std::pair<double, double>;  // (lon, lat) as given in the file
using Ring = std::vector<Point>;
using PolygonShape = std::vector<Ring>;  // outer ring followed by holes

struct Feature {
  std::vector<PolygonShape> polygons;
  std::map<std::string, std::string> properties;  // missing/null -> ""
};

struct FeatureSet {
  std::vector<Feature> features;
  std::vector<std::string> property_names;  // first-seen order
};

struct EdgeList {
  std::vector<std::pair<std::string, std::string>> edges;
  csv::Table attributes;  // extra edge columns, row-aligned with edges
};

struct ImageRef {
  std::filesystem::path path;
};

using Payload = std::variant<csv::Table, Tree, std::vector<Sequence>, FeatureSet, EdgeList, ImageRef>;

/// Row-aligned view of a dataset's attributes: one record per table row,
/// tree leaf, sequence, polygon feature, network node, or image lane.
struct RecordTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> cells;  // [column][record]
  std::optional<std::size_t> key_column;        // implicit identifier, if any
  std::size_t record_count = 0;

  std::optional<std::size_t> column_index(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return i;
    }
    return std::nullopt;
  }

  const std::vector<std::string>& column(std::string_view name) const {
    auto idx = column_index(name);
    if (!idx) throw Error(ErrorCode::DataMismatch, "no field '" + std::string(name) + "'");
    return cells[*idx];
  }
};

struct Dataset {
  std::string id;
  DataType dtype = DataType::Tabular;
  Payload payload;
  std::optional<csv::Table> associated;
  std::string associated_key;  // associated column joined to the primary ids
  std::filesystem::path source_path;
  RecordTable records;
};

// ---------------------------------------------------------------------------
// Format readers

namespace io {

inline csv::Table read_table(const std::filesystem::path& path, std::string_view what) {
  auto table = csv::parse(text::read_file(path), std::string(what) + " " + path.string());
  for (auto& h : table.header) h = std::string(text::trim(h));
  std::set<std::string> seen;
  for (const auto& h : table.header) {
    if (h.empty()) throw Error(ErrorCode::ParseError, path.string() + ": empty column name");
    if (!seen.insert(h).second) {
      throw Error(ErrorCode::ParseError, path.string() + ": duplicate column '" + h + "'");
    }
  }
  return table;
}

inline std::vector<Sequence> parse_fasta(std::string_view src) {
  std::vector<Sequence> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  std::set<std::string> ids;
  while (pos <= src.size()) {
    auto nl = src.find('\n', pos);
    auto line = text::trim(src.substr(pos, nl == std::string_view::npos ? src.npos : nl - pos));
    ++line_no;
    if (!line.empty() && line.front() == '>') {
      auto header = text::trim(line.substr(1));
      auto id = header.substr(0, header.find_first_of(" \t"));
      if (id.empty()) {
        throw Error(ErrorCode::ParseError, "genomic: empty sequence id at line " + std::to_string(line_no));
      }
      if (!ids.insert(std::string(id)).second) {
        throw Error(ErrorCode::ParseError, "genomic: duplicate sequence id '" + std::string(id) +
                                               "' at line " + std::to_string(line_no));
      }
      out.push_back({std::string(id), {}});
    } else if (!line.empty() && line.front() != ';') {
      if (out.empty()) {
        throw Error(ErrorCode::ParseError,
                    "genomic: sequence data before first header at line " + std::to_string(line_no));
      }
      out.back().residues += line;
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  if (out.empty()) throw Error(ErrorCode::ParseError, "genomic: no FASTA records");
  return out;
}

inline std::string property_to_string(const nlohmann::json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  if (v.is_number_float()) return text::shortest(v.get<double>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

inline FeatureSet parse_geojson(std::string_view src) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(src);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError,
                "spatial: invalid JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
      !doc.contains("features") || !doc["features"].is_array()) {
    throw Error(ErrorCode::ParseError, "spatial: expected a GeoJSON FeatureCollection");
  }
  auto read_ring = [](const nlohmann::json& ring, std::size_t f) {
    Ring out;
    if (!ring.is_array()) {
      throw Error(ErrorCode::ParseError, "spatial: feature " + std::to_string(f) + " has a malformed ring");
    }
    for (const auto& pt : ring) {
      if (!pt.is_array() || pt.size() < 2 || !pt[0].is_number() || !pt[1].is_number()) {
        throw Error(ErrorCode::ParseError, "spatial: feature " + std::to_string(f) + " has a malformed coordinate");
      }
      out.emplace_back(pt[0].get<double>(), pt[1].get<double>());
    }
    return out;
  };
  auto read_polygon = [&](const nlohmann::json& poly, std::size_t f) {
    PolygonShape shape;
    if (!poly.is_array() || poly.empty()) {
      throw Error(ErrorCode::ParseError, "spatial: feature " + std::to_string(f) + " has an empty polygon");
    }
    for (const auto& ring : poly) shape.push_back(read_ring(ring, f));
    return shape;
  };

  FeatureSet set;
  std::set<std::string> seen_props;
  std::size_t f = 0;
  for (const auto& feat : doc["features"]) {
    if (!feat.is_object() || !feat.contains("geometry") || !feat["geometry"].is_object()) {
      throw Error(ErrorCode::ParseError, "spatial: feature " + std::to_string(f) + " has no geometry");
    }
    const auto& geom = feat["geometry"];
    auto type = geom.value("type", "");
    Feature out;
    if (type == "Polygon") {
      out.polygons.push_back(read_polygon(geom.at("coordinates"), f));
    } else if (type == "MultiPolygon") {
      if (!geom.at("coordinates").is_array()) {
        throw Error(ErrorCode::ParseError, "spatial: feature " + std::to_string(f) + " has malformed coordinates");
      }
      for (const auto& poly : geom["coordinates"]) out.polygons.push_back(read_polygon(poly, f));
    } else {
      throw Error(ErrorCode::ParseError, "spatial: feature " + std::to_string(f) +
                                             " geometry '" + type + "' is not Polygon/MultiPolygon");
    }
    if (feat.contains("properties") && feat["properties"].is_object()) {
      for (const auto& [k, v] : feat["properties"].items()) {
        out.properties[k] = property_to_string(v);
        if (seen_props.insert(k).second) set.property_names.push_back(k);
      }
    }
    set.features.push_back(std::move(out));
    ++f;
  }
  if (set.features.empty()) throw Error(ErrorCode::ParseError, "spatial: FeatureCollection has no features");
  return set;
}

}  // namespace io

// ---------------------------------------------------------------------------
// Record tables

namespace detail {

inline std::string implicit_key_name(const Dataset& ds) {
  switch (ds.dtype) {
    case DataType::Tree: return ds.id + ".tip_label";
    case DataType::Genomic: return ds.id + ".seq_id";
    case DataType::Network: return ds.id + ".node_id";
    default: return {};
  }
}

inline std::vector<std::string> primary_ids(const Dataset& ds) {
  std::vector<std::string> ids;
  if (const auto* tree = std::get_if<Tree>(&ds.payload)) {
    ids = tree->leaf_labels();
  } else if (const auto* seqs = std::get_if<std::vector<Sequence>>(&ds.payload)) {
    for (const auto& s : *seqs) ids.push_back(s.id);
  } else if (const auto* net = std::get_if<EdgeList>(&ds.payload)) {
    std::set<std::string> seen;
    for (const auto& [a, b] : net->edges) {
      for (const auto* n : {&a, &b}) {
        if (seen.insert(*n).second) ids.push_back(*n);
      }
    }
  }
  return ids;
}

/// Picks the associated column whose values best overlap the primary ids.
inline std::pair<std::size_t, std::size_t> best_key_column(const csv::Table& table,
                                                           const std::vector<std::string>& ids) {
  std::set<std::string> id_set;
  for (const auto& id : ids) id_set.insert(std::string(text::trim(id)));
  std::size_t best = 0, best_hits = 0;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    std::set<std::string> hit;
    for (const auto& row : table.rows) {
      auto v = std::string(text::trim(row[c]));
      if (id_set.count(v)) hit.insert(v);
    }
    if (hit.size() > best_hits) {
      best = c;
      best_hits = hit.size();
    }
  }
  return {best, best_hits};
}

inline RecordTable build_records(const Dataset& ds) {
  RecordTable rt;
  auto add_table_columns = [&](const csv::Table& table) {
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      rt.columns.push_back(table.header[c]);
      std::vector<std::string> col;
      col.reserve(table.rows.size());
      for (const auto& row : table.rows) col.push_back(row[c]);
      rt.cells.push_back(std::move(col));
    }
    rt.record_count = table.rows.size();
  };

  switch (ds.dtype) {
    case DataType::Tabular:
      add_table_columns(std::get<csv::Table>(ds.payload));
      break;
    case DataType::Image:
      // Lanes are the sidecar rows; the first sidecar column identifies them.
      add_table_columns(*ds.associated);
      rt.key_column = 0;
      break;
    case DataType::Spatial: {
      const auto& fs = std::get<FeatureSet>(ds.payload);
      rt.record_count = fs.features.size();
      for (const auto& name : fs.property_names) {
        rt.columns.push_back(name);
        std::vector<std::string> col;
        for (const auto& feat : fs.features) {
          auto it = feat.properties.find(name);
          col.push_back(it == feat.properties.end() ? std::string() : it->second);
        }
        rt.cells.push_back(std::move(col));
      }
      break;
    }
    case DataType::Tree:
    case DataType::Genomic:
    case DataType::Network: {
      auto ids = primary_ids(ds);
      rt.record_count = ids.size();
      rt.columns.push_back(implicit_key_name(ds));
      rt.cells.push_back(ids);
      rt.key_column = 0;
      if (ds.associated) {
        const auto& table = *ds.associated;
        auto key_idx = static_cast<std::size_t>(
            std::find(table.header.begin(), table.header.end(), ds.associated_key) - table.header.begin());
        std::map<std::string, std::size_t> row_of;
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
          row_of.emplace(std::string(text::trim(table.rows[r][key_idx])), r);
        }
        for (std::size_t c = 0; c < table.header.size(); ++c) {
          rt.columns.push_back(table.header[c]);
          std::vector<std::string> col;
          col.reserve(ids.size());
          for (const auto& id : ids) {
            auto it = row_of.find(std::string(text::trim(id)));
            col.push_back(it == row_of.end() ? std::string() : table.rows[it->second][c]);
          }
          rt.cells.push_back(std::move(col));
        }
      }
      break;
    }
  }
  return rt;
}

}  // namespace detail

/// Loads one dataset from disk. The id defaults to the file stem.
/// Tree, genomic and network payloads may carry an associated table keyed to
/// their ids; images require one (the lane sidecar).
inline Dataset load_dataset(const std::filesystem::path& path, DataType dtype,
                            const std::optional<std::filesystem::path>& associated_path = std::nullopt,
                            std::string id = {}) {
  Dataset ds;
  ds.id = id.empty() ? path.stem().string() : std::move(id);
  ds.dtype = dtype;
  ds.source_path = path;
  const std::string where = std::string(to_string(dtype)) + " " + path.string();

  switch (dtype) {
    case DataType::Tabular: {
      auto table = io::read_table(path, "tabular");
      if (table.rows.empty()) throw Error(ErrorCode::ParseError, where + ": header only, no records");
      ds.payload = std::move(table);
      break;
    }
    case DataType::Tree: {
      auto tree = parse_newick(text::read_file(path));
      for (auto leaf : tree.leaves()) {
        if (text::trim(tree.nodes[leaf].name).empty()) {
          throw Error(ErrorCode::ParseError, where + ": unnamed leaf");
        }
      }
      ds.payload = std::move(tree);
      break;
    }
    case DataType::Genomic:
      ds.payload = io::parse_fasta(text::read_file(path));
      break;
    case DataType::Spatial:
      ds.payload = io::parse_geojson(text::read_file(path));
      break;
    case DataType::Network: {
      auto table = io::read_table(path, "network");
      if (table.header.size() < 2) {
        throw Error(ErrorCode::ParseError, where + ": edge list needs source,target columns");
      }
      if (table.rows.empty()) throw Error(ErrorCode::ParseError, where + ": no edges");
      EdgeList net;
      net.attributes.header.assign(table.header.begin() + 2, table.header.end());
      for (auto& row : table.rows) {
        net.edges.emplace_back(std::string(text::trim(row[0])), std::string(text::trim(row[1])));
        net.attributes.rows.emplace_back(row.begin() + 2, row.end());
      }
      ds.payload = std::move(net);
      break;
    }
    case DataType::Image: {
      std::error_code ec;
      if (!std::filesystem::is_regular_file(path, ec)) throw Error(ErrorCode::FileNotFound, path.string());
      if (!associated_path) {
        throw Error(ErrorCode::ParseError, where + ": image datasets require a sidecar table");
      }
      ds.payload = ImageRef{path};
      break;
    }
  }

  if (associated_path) {
    if (dtype == DataType::Tabular || dtype == DataType::Spatial) {
      throw Error(ErrorCode::InvalidArgument,
                  where + ": associated tables are only supported for tree, genomic, network and image data");
    }
    auto table = io::read_table(*associated_path, "associated");
    if (table.rows.empty()) {
      throw Error(ErrorCode::ParseError, associated_path->string() + ": header only, no records");
    }
    if (dtype != DataType::Image) {
      auto [col, hits] = detail::best_key_column(table, detail::primary_ids(ds));
      if (hits == 0) {
        throw Error(ErrorCode::KeyMismatch, associated_path->string() +
                                                " shares no key values with " + path.string());
      }
      ds.associated_key = table.header[col];
    } else {
      ds.associated_key = table.header.front();
    }
    ds.associated = std::move(table);
  }

  ds.records = detail::build_records(ds);
  return ds;
}

}  // namespace gevitrec
