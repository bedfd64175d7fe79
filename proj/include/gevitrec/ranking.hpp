#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "gevitrec/csv.hpp"
#include "gevitrec/dataset.hpp"
#include "gevitrec/entity_graph.hpp"
#include "gevitrec/error.hpp"
#include "gevitrec/text.hpp"

namespace gevitrec {

inline constexpr double kDefaultDecay = 0.9;
inline constexpr double kRelevanceScale = 10.0;
inline constexpr double kRelevanceFloor = 1.0;

// ---------------------------------------------------------------------------
// Design space

struct PrevalenceEntry {
  std::string chart_type;
  int year = 0;
  long long count = 0;
};

/// Per-chart-type, per-year usage counts harvested from a domain's figures.
struct PrevalenceDesignSpace {
  std::vector<PrevalenceEntry> entries;

  bool empty() const { return entries.empty(); }

  int year_max() const {
    int y = entries.empty() ? 0 : entries.front().year;
    for (const auto& e : entries) y = std::max(y, e.year);
    return y;
  }

  void validate() const {
    std::set<std::pair<std::string, int>> seen;
    for (const auto& e : entries) {
      if (e.count < 0) {
        throw Error(ErrorCode::ParseError, "design space: negative count for " + e.chart_type);
      }
      if (!seen.emplace(e.chart_type, e.year).second) {
        throw Error(ErrorCode::ParseError, "design space: duplicate entry (" + e.chart_type + ", " +
                                               std::to_string(e.year) + ")");
      }
    }
  }

  /// CSV with header chart_type,year,count.
  static PrevalenceDesignSpace from_csv(std::string_view src) {
    auto table = csv::parse(src, "design space");
    for (auto& h : table.header) h = std::string(text::trim(h));
    if (table.header != csv::Row{"chart_type", "year", "count"}) {
      throw Error(ErrorCode::ParseError, "design space: header must be chart_type,year,count");
    }
    PrevalenceDesignSpace space;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto& row = table.rows[r];
      auto year = text::parse_number(row[1]);
      auto count = text::parse_number(row[2]);
      if (!year || !count || *year != std::floor(*year) || *count != std::floor(*count)) {
        throw Error(ErrorCode::ParseError, "design space: record " + std::to_string(r + 2) +
                                               " needs integer year and count");
      }
      space.entries.push_back({std::string(text::trim(row[0])), static_cast<int>(*year),
                               static_cast<long long>(*count)});
    }
    space.validate();
    return space;
  }
};

using RawRelevance = std::map<std::string, double>;

/// R(V) = sum over years of count(V, y) * lambda^(year_max - y).
inline RawRelevance raw_relevance(const PrevalenceDesignSpace& space, double lambda = kDefaultDecay) {
  if (space.empty()) throw Error(ErrorCode::EmptyDesignSpace, "design space has no entries");
  if (!(lambda > 0.0 && lambda <= 1.0)) throw Error(ErrorCode::InvalidArgument, "lambda must lie in (0, 1]");
  RawRelevance r;
  const int ymax = space.year_max();
  for (const auto& e : space.entries) {
    r[e.chart_type] += static_cast<double>(e.count) * std::pow(lambda, ymax - e.year);
  }
  return r;
}

struct RelevanceTable {
  std::map<std::string, double> raw;
  std::map<std::string, double> scaled;  // R' in [1, 10]
  double lambda = kDefaultDecay;

  bool contains(std::string_view chart) const { return scaled.count(std::string(chart)) > 0; }

  double of(std::string_view chart) const {
    auto it = scaled.find(std::string(chart));
    if (it == scaled.end()) {
      throw Error(ErrorCode::ConfigError, "chart type '" + std::string(chart) + "' has no relevance score");
    }
    return it->second;
  }

  std::string to_csv() const {
    std::vector<std::pair<std::string, double>> order(scaled.begin(), scaled.end());
    std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<csv::Row> rows;
    for (const auto& [chart, s] : order) {
      rows.push_back({chart, text::fixed(raw.at(chart), 4), text::fixed(s, 4), text::shortest(lambda)});
    }
    return csv::write({"chart_type", "raw_relevance", "scaled_relevance", "lambda"}, rows);
  }
};

/// R' = max(1, R / max(R) * 10); the most prevalent chart scores exactly 10.
inline RelevanceTable scaled_relevance(const RawRelevance& raw, double lambda = kDefaultDecay) {
  if (raw.empty()) throw Error(ErrorCode::EmptyDesignSpace, "no relevance values");
  double max_r = 0.0;
  for (const auto& [_, r] : raw) max_r = std::max(max_r, r);
  if (max_r <= 0.0) throw Error(ErrorCode::AllZeroCounts, "every chart type has zero usage");
  RelevanceTable t;
  t.raw = raw;
  t.lambda = lambda;
  for (const auto& [chart, r] : raw) {
    t.scaled[chart] = r == max_r ? kRelevanceScale : std::max(kRelevanceFloor, r / max_r * kRelevanceScale);
  }
  return t;
}

inline RelevanceTable relevance_table(const PrevalenceDesignSpace& space, double lambda = kDefaultDecay) {
  return scaled_relevance(raw_relevance(space, lambda), lambda);
}

// ---------------------------------------------------------------------------
// Data type -> candidate chart types

struct TypeEncodingMap {
  std::map<DataType, std::vector<std::string>> charts;

  const std::vector<std::string>& candidates(DataType t) const {
    auto it = charts.find(t);
    if (it == charts.end() || it->second.empty()) {
      throw Error(ErrorCode::UnmappedDataType,
                  "no chart types mapped for data type '" + std::string(to_string(t)) + "'");
    }
    return it->second;
  }

  void validate(const RelevanceTable& rel) const {
    for (const auto& [t, list] : charts) {
      for (const auto& c : list) {
        if (!rel.contains(c)) {
          throw Error(ErrorCode::ConfigError, "type map lists '" + c + "' for " + std::string(to_string(t)) +
                                                  " but the design space has no such chart type");
        }
      }
    }
  }

  /// JSON object {dtype: [chart_type, ...]}.
  static TypeEncodingMap from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorCode::ParseError, "type encoding map must be a JSON object");
    TypeEncodingMap m;
    for (const auto& [k, v] : j.items()) {
      if (!v.is_array()) throw Error(ErrorCode::ParseError, "type encoding map: '" + k + "' must map to an array");
      auto& list = m.charts[parse_data_type(k)];
      for (const auto& c : v) list.push_back(c.get<std::string>());
    }
    return m;
  }
};

// ---------------------------------------------------------------------------
// Path metrics

/// Mean Jaccard weight over the path's linkages; 0 for a single-source path.
inline double path_strength(const GraphPath& path) {
  auto w = path.link_weights();
  if (w.empty()) return 0.0;
  double sum = 0.0;
  for (double x : w) sum += x;
  return sum / static_cast<double>(w.size());
}

inline void check_hubs(const GraphPath& path, const EntityGraph& g) {
  for (auto h : path.hubs) {
    if (h >= g.hubs.size()) throw Error(ErrorCode::UnknownDataset, "path hub " + std::to_string(h) + " is not in the graph");
  }
}

/// Number of distinct data types among the path's sources.
inline int path_diversity(const GraphPath& path, const EntityGraph& g) {
  check_hubs(path, g);
  std::set<DataType> types;
  for (auto h : path.hubs) types.insert(g.hubs[h].dtype);
  return static_cast<int>(types.size());
}

/// Sum over sources of the best R' among that source's candidate charts.
inline double path_vis_relevance(const GraphPath& path, const EntityGraph& g, const TypeEncodingMap& map,
                                 const RelevanceTable& rel) {
  check_hubs(path, g);
  double total = 0.0;
  for (auto h : path.hubs) {
    double best = 0.0;
    for (const auto& chart : map.candidates(g.hubs[h].dtype)) best = std::max(best, rel.of(chart));
    total += best;
  }
  return total;
}

struct RankedPath {
  GraphPath path;
  double p_s = 0.0;
  int p_d = 0;
  double p_vr = 0.0;
  int rank_s = 0;
  int rank_d = 0;
  int rank_vr = 0;
  int path_score = 0;
};

inline constexpr double kMetricTieEpsilon = 1e-9;

/// Competition ranking: the largest value gets rank 1 and ties share the
/// smallest rank of their block ("1224").
inline std::vector<int> competition_ranks(const std::vector<double>& values) {
  std::vector<int> ranks(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    int better = 0;
    for (double v : values) better += v > values[i] + kMetricTieEpsilon ? 1 : 0;
    ranks[i] = better + 1;
  }
  return ranks;
}

/// Scores every path of every component, rank-normalizes each metric over the
/// pooled list, and sorts by ascending path score (3 is best).
inline std::vector<RankedPath> rank_paths(const EntityGraph& g, const RelevanceTable& rel,
                                          const TypeEncodingMap& map) {
  std::vector<RankedPath> out;
  auto components = connected_components(g);
  for (std::size_t c = 0; c < components.size(); ++c) {
    for (auto& p : enumerate_paths(g, components[c], c)) {
      RankedPath rp;
      rp.p_s = path_strength(p);
      rp.p_d = path_diversity(p, g);
      rp.p_vr = path_vis_relevance(p, g, map, rel);
      rp.path = std::move(p);
      out.push_back(std::move(rp));
    }
  }
  std::vector<double> s, d, vr;
  for (const auto& rp : out) {
    s.push_back(rp.p_s);
    d.push_back(rp.p_d);
    vr.push_back(rp.p_vr);
  }
  auto rs = competition_ranks(s), rd = competition_ranks(d), rv = competition_ranks(vr);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].rank_s = rs[i];
    out[i].rank_d = rd[i];
    out[i].rank_vr = rv[i];
    out[i].path_score = rs[i] + rd[i] + rv[i];
  }
  std::stable_sort(out.begin(), out.end(), [&](const RankedPath& a, const RankedPath& b) {
    if (a.path_score != b.path_score) return a.path_score < b.path_score;
    if (a.path.hubs.size() != b.path.hubs.size()) return a.path.hubs.size() > b.path.hubs.size();
    auto ia = a.path.source_ids(g), ib = b.path.source_ids(g);
    if (ia != ib) return ia < ib;
    return a.path.nodes < b.path.nodes;
  });
  return out;
}

inline std::vector<RankedPath> rank_paths(const EntityGraph& g, const PrevalenceDesignSpace& space,
                                          const TypeEncodingMap& map, double lambda = kDefaultDecay) {
  if (g.hubs.empty()) return {};
  return rank_paths(g, relevance_table(space, lambda), map);
}

inline nlohmann::json path_json(const RankedPath& rp, const EntityGraph& g) {
  using nlohmann::json;
  json edges = json::array();
  for (const auto& e : rp.path.edges) {
    json je = {{"a", g.node_id(e.from)}, {"b", g.node_id(e.to)},
               {"kind", e.weight ? "field-field" : "source-field"}};
    if (e.weight) je["weight"] = *e.weight;
    edges.push_back(je);
  }
  json nodes = json::array();
  for (auto n : rp.path.nodes) nodes.push_back(g.node_id(n));
  return {{"hubs", rp.path.source_ids(g)},
          {"nodes", nodes},
          {"edges", edges},
          {"component", rp.path.component_id},
          {"p_s", rp.p_s},
          {"p_d", rp.p_d},
          {"p_vr", rp.p_vr},
          {"rank_s", rp.rank_s},
          {"rank_d", rp.rank_d},
          {"rank_vr", rp.rank_vr},
          {"path_score", rp.path_score}};
}

inline nlohmann::json ranked_paths_json(const std::vector<RankedPath>& paths, const EntityGraph& g) {
  auto arr = nlohmann::json::array();
  for (const auto& rp : paths) arr.push_back(path_json(rp, g));
  return arr;
}

}  // namespace gevitrec
