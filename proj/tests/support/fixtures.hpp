#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gevitrec/gevitrec.hpp"

#ifndef GEVITREC_DATA_DIR
#error "GEVITREC_DATA_DIR must be defined"
#endif
#ifndef GEVITREC_SAMPLES_DIR
#error "GEVITREC_SAMPLES_DIR must be defined"
#endif

namespace fixtures {

namespace fs = std::filesystem;
using namespace gevitrec;

/// Code of the Error the callable throws, nullopt when it throws nothing.
inline std::optional<ErrorCode> code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline fs::path data_dir() { return GEVITREC_DATA_DIR; }
inline fs::path samples_dir() { return GEVITREC_SAMPLES_DIR; }

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = fs::temp_directory_path() /
            ("gevitrec_test_" + std::to_string(stamp) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }

  fs::path write(const std::string& name, const std::string& content) const {
    auto p = path_ / name;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << content;
    return p;
  }

 private:
  fs::path path_;
};

inline std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline RunConfig default_config() {
  RunConfig c = RunConfig::from_json(nlohmann::json::object(), fs::current_path(), data_dir());
  return c;
}

inline const Models& default_models() {
  static const Models m = load_models(default_config());
  return m;
}

inline RunConfig sample_config(const std::string& name) {
  return RunConfig::load(samples_dir() / name / "config.json", data_dir());
}

/// Loads and links the datasets a config names.
inline std::unique_ptr<LinkedData> link_config(const RunConfig& cfg) {
  return link_datasets(load_datasets(cfg), cfg.min_jaccard);
}

/// Hand-built complete spec; x and y become required unless listed.
inline ChartSpec spec(const std::string& ds, const std::string& chart, const std::map<Channel, std::string>& b,
                      std::vector<Channel> required = {}) {
  ChartSpec s;
  s.id = ds + "/" + chart;
  s.chart_type = chart;
  s.dataset_id = ds;
  for (const auto& [c, f] : b) s.bindings[c] = FieldRef{ds, f};
  if (required.empty()) {
    for (const auto& [c, _] : b) {
      if (c == Channel::X || c == Channel::Y) required.push_back(c);
    }
  }
  s.required = required;
  const auto& rel = default_models().relevance;
  s.relevance = rel.contains(chart) ? rel.of(chart) : 0.0;
  s.complete = true;
  return s;
}

inline std::string csv_text(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
    out += "\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

/// Tabular dataset written to dir and loaded under the given id.
inline Dataset tabular(const TempDir& dir, const std::string& id, const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows) {
  auto p = dir.write(id + ".csv", csv_text(header, rows));
  return load_dataset(p, DataType::Tabular, std::nullopt, id);
}

/// Non-numeric field built in memory.
inline Field text_field(const std::string& source, const std::string& name, std::vector<std::string> values,
                        DataType dtype = DataType::Tabular) {
  Field f;
  f.name = name;
  f.source_id = source;
  f.source_type = dtype;
  f.kind = FieldKind::NonNumeric;
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  f.values = values;
  f.cardinality = values.size();
  f.row_count = values.size();
  return f;
}

inline Field numeric_field(const std::string& source, const std::string& name, DataType dtype = DataType::Tabular) {
  Field f;
  f.name = name;
  f.source_id = source;
  f.source_type = dtype;
  f.kind = FieldKind::Numeric;
  f.row_count = 10;
  return f;
}

/// Random entity graph over 1..max_datasets sources, each with 1..3 text
/// fields drawn from a small shared vocabulary plus an optional numeric field.
inline std::vector<Field> random_fields(std::mt19937& rng, std::size_t max_datasets = 6) {
  static const std::vector<DataType> types = {DataType::Tabular, DataType::Tree, DataType::Genomic,
                                              DataType::Spatial, DataType::Network, DataType::Image};
  std::uniform_int_distribution<std::size_t> n_ds(1, max_datasets), n_fields(1, 3), n_vals(1, 8), pool(0, 11),
      type(0, types.size() - 1);
  std::bernoulli_distribution coin(0.5);
  std::vector<Field> out;
  auto n = n_ds(rng);
  for (std::size_t d = 0; d < n; ++d) {
    std::string id = "d" + std::to_string(d);
    auto dtype = types[type(rng)];
    auto k = n_fields(rng);
    for (std::size_t f = 0; f < k; ++f) {
      std::vector<std::string> vals;
      auto m = n_vals(rng);
      for (std::size_t v = 0; v < m; ++v) vals.push_back("v" + std::to_string(pool(rng)));
      out.push_back(text_field(id, "f" + std::to_string(f), vals, dtype));
    }
    if (coin(rng)) out.push_back(numeric_field(id, "num", dtype));
  }
  return out;
}

/// A tabular dataset that yields six charts: bar, scatter, heatmap, line,
/// histogram and table.
inline Dataset six_chart_dataset(const TempDir& dir, const std::string& id = "six") {
  std::vector<std::vector<std::string>> rows;
  const char* cats[] = {"a", "b", "c"};
  for (int i = 0; i < 14; ++i) {
    rows.push_back({"r" + std::to_string(100 + i), cats[i % 3], std::to_string(i * 3 % 7), std::to_string(10 + i)});
  }
  return tabular(dir, id, {"id", "group", "m1", "m2"}, rows);
}

/// Six tabular sources sharing an exact "id" key: one component holding
/// 15 pair paths and 6 singletons.
inline std::vector<Dataset> many_path_datasets(const TempDir& dir, std::size_t n = 6) {
  std::vector<Dataset> out;
  for (std::size_t d = 0; d < n; ++d) {
    std::vector<std::vector<std::string>> rows;
    for (int i = 0; i < 8; ++i) rows.push_back({"k" + std::to_string(i), std::to_string(i * (int(d) + 1))});
    out.push_back(tabular(dir, "t" + std::to_string(d), {"id", "v" + std::to_string(d)}, rows));
  }
  return out;
}

/// Random binary tree over the given leaves, with branch lengths.
inline std::string random_newick(const std::vector<std::string>& leaves, std::mt19937& rng) {
  std::vector<std::string> nodes;
  std::uniform_real_distribution<double> bl(0.001, 0.05);
  for (const auto& l : leaves) nodes.push_back(l + ":" + text::fixed(bl(rng), 4));
  while (nodes.size() > 1) {
    std::uniform_int_distribution<std::size_t> pick(0, nodes.size() - 2);
    auto i = pick(rng);
    auto merged = "(" + nodes[i] + "," + nodes[i + 1] + "):" + text::fixed(bl(rng), 4);
    nodes.erase(nodes.begin() + long(i), nodes.begin() + long(i) + 2);
    nodes.insert(nodes.begin() + long(i), merged);
  }
  auto root = nodes.front();
  return root.substr(0, root.rfind(':')) + ";";
}

/// Ebola-scale inputs: a 1600-leaf tree with metadata, a 1600-row case table
/// and 60 region polygons. Writes config.json into dir and returns its path.
inline fs::path write_ebola_fixture(const TempDir& dir, std::size_t samples = 1600, std::size_t regions = 60) {
  std::mt19937 rng(20140301);
  const std::vector<std::string> countries = {"Guinea", "Liberia", "Sierra Leone"};
  std::vector<std::string> ids, region_names;
  for (std::size_t r = 0; r < regions; ++r) region_names.push_back("R" + std::to_string(100 + r));
  for (std::size_t i = 0; i < samples; ++i) ids.push_back("EBOV" + std::to_string(10000 + i));

  dir.write("ebola.nwk", random_newick(ids, rng));
  std::string meta = "sample_id,country\n", cases = "sample_id,country,region,date,age\n";
  std::uniform_int_distribution<std::size_t> pick_region(0, regions - 1);
  std::uniform_int_distribution<int> day(1, 28), month(1, 12), age(1, 80);
  for (const auto& id : ids) {
    auto r = pick_region(rng);
    const auto& c = countries[r % countries.size()];
    meta += id + "," + c + "\n";
    char date[16];
    std::snprintf(date, sizeof date, "2015-%02d-%02d", month(rng), day(rng));
    cases += id + "," + c + "," + region_names[r] + "," + date + "," + std::to_string(age(rng)) + "\n";
  }
  dir.write("ebola_meta.csv", meta);
  dir.write("ebola_cases.csv", cases);

  nlohmann::json features = nlohmann::json::array();
  for (std::size_t r = 0; r < regions; ++r) {
    double x = double(r % 10) * 1.0 - 14.0, y = double(r / 10) * 1.0 + 4.0;
    nlohmann::json ring = {{x, y}, {x + 1, y}, {x + 1, y + 1}, {x, y + 1}, {x, y}};
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "Polygon"}, {"coordinates", {ring}}}},
                        {"properties", {{"region", region_names[r]},
                                        {"country", countries[r % countries.size()]},
                                        {"population", 10000 + 137 * r}}}});
  }
  dir.write("regions.geojson", nlohmann::json({{"type", "FeatureCollection"}, {"features", features}}).dump());

  nlohmann::json cfg = {{"datasets",
                         {{{"path", "ebola.nwk"}, {"dtype", "tree"}, {"associated", "ebola_meta.csv"}, {"id", "tree"}},
                          {{"path", "ebola_cases.csv"}, {"dtype", "tabular"}, {"id", "cases"}},
                          {{"path", "regions.geojson"}, {"dtype", "spatial"}, {"id", "regions"}}}},
                        {"seed", 7},
                        {"output_dir", "out"}};
  return dir.write("config.json", cfg.dump(2));
}

/// Random linked corpus of 1..5 sources drawn from tree, tabular, spatial
/// and genomic generators over a shared pool of sample ids and locations.
inline std::vector<Dataset> random_corpus(const TempDir& dir, std::mt19937& rng, const std::string& tag) {
  const std::vector<std::string> locations = {"North", "South", "East", "West", "Central"};
  std::vector<std::string> pool;
  for (int i = 0; i < 20; ++i) pool.push_back("S" + std::to_string(100 + i));
  auto subset = [&](std::size_t lo) {
    std::vector<std::string> ids = pool;
    std::shuffle(ids.begin(), ids.end(), rng);
    std::uniform_int_distribution<std::size_t> n(lo, ids.size());
    ids.resize(n(rng));
    return ids;
  };
  std::uniform_int_distribution<std::size_t> loc(0, locations.size() - 1), n_ds(1, 5), kind(0, 4);
  std::uniform_int_distribution<int> age(1, 90), day(1, 28);
  std::vector<Dataset> out;
  auto count = n_ds(rng);
  for (std::size_t d = 0; d < count; ++d) {
    auto id = tag + "_" + std::to_string(d);
    switch (kind(rng)) {
      case 0: {
        auto ids = subset(3);
        std::string meta = "sample_id,location\n";
        for (const auto& s : ids) meta += s + "," + locations[loc(rng)] + "\n";
        auto nwk = dir.write(id + ".nwk", random_newick(ids, rng));
        auto m = dir.write(id + "_meta.csv", meta);
        out.push_back(load_dataset(nwk, DataType::Tree, m, id));
        break;
      }
      case 1:
      case 2: {
        auto ids = subset(2);
        std::vector<std::vector<std::string>> rows;
        for (const auto& s : ids) {
          char date[16];
          std::snprintf(date, sizeof date, "2017-03-%02d", day(rng));
          rows.push_back({s, locations[loc(rng)], std::to_string(age(rng)), date});
        }
        out.push_back(tabular(dir, id, {"sample_id", "location", "age", "onset"}, rows));
        break;
      }
      case 3: {
        nlohmann::json features = nlohmann::json::array();
        for (std::size_t r = 0; r < locations.size(); ++r) {
          double x = double(r) * 2.0;
          nlohmann::json ring = {{x, 0}, {x + 2, 0}, {x + 2, 2}, {x, 2}, {x, 0}};
          features.push_back({{"type", "Feature"},
                              {"geometry", {{"type", "Polygon"}, {"coordinates", {ring}}}},
                              {"properties", {{"location", locations[r]}, {"population", 1000 * (r + 1)}}}});
        }
        auto p = dir.write(id + ".geojson",
                           nlohmann::json({{"type", "FeatureCollection"}, {"features", features}}).dump());
        out.push_back(load_dataset(p, DataType::Spatial, std::nullopt, id));
        break;
      }
      default: {
        auto ids = subset(2);
        std::string fasta;
        std::uniform_int_distribution<int> base(0, 3);
        for (const auto& s : ids) {
          fasta += ">" + s + "\n";
          for (int i = 0; i < 24; ++i) fasta += "ACGT"[base(rng)];
          fasta += "\n";
        }
        out.push_back(load_dataset(dir.write(id + ".fasta", fasta), DataType::Genomic, std::nullopt, id));
        break;
      }
    }
  }
  return out;
}

/// Elements of an SVG document carrying the given class, as raw tag text.
inline std::vector<std::string> elements_with_class(const std::string& svg, const std::string& cls) {
  std::vector<std::string> out;
  const std::string needle = "class=\"" + cls + "\"";
  std::size_t pos = 0;
  while ((pos = svg.find(needle, pos)) != std::string::npos) {
    auto start = svg.rfind('<', pos);
    auto end = svg.find('>', pos);
    out.push_back(svg.substr(start, end - start + 1));
    pos = end;
  }
  return out;
}

inline std::string attr(const std::string& element, const std::string& name) {
  auto key = " " + name + "=\"";
  auto p = element.find(key);
  if (p == std::string::npos) return {};
  p += key.size();
  return element.substr(p, element.find('"', p) - p);
}

inline std::vector<std::string> attrs(const std::vector<std::string>& elements, const std::string& name) {
  std::vector<std::string> out;
  for (const auto& e : elements) out.push_back(attr(e, name));
  return out;
}

/// Text content of the elements with a class, in document order.
inline std::vector<std::string> texts_with_class(const std::string& svg, const std::string& cls) {
  std::vector<std::string> out;
  const std::string needle = "class=\"" + cls + "\"";
  std::size_t pos = 0;
  while ((pos = svg.find(needle, pos)) != std::string::npos) {
    auto gt = svg.find('>', pos);
    auto lt = svg.find('<', gt);
    out.push_back(svg.substr(gt + 1, lt - gt - 1));
    pos = lt;
  }
  return out;
}

}  // namespace fixtures
