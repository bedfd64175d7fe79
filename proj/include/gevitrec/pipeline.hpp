#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gevitrec/catalog.hpp"
#include "gevitrec/chartspec.hpp"
#include "gevitrec/combine.hpp"
#include "gevitrec/dataset.hpp"
#include "gevitrec/entity_graph.hpp"
#include "gevitrec/error.hpp"
#include "gevitrec/fields.hpp"
#include "gevitrec/layout.hpp"
#include "gevitrec/ranking.hpp"
#include "gevitrec/render.hpp"
#include "gevitrec/text.hpp"

namespace gevitrec {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::size_t kDefaultMaxViewsPerComponent = 10;

namespace fs = std::filesystem;

struct DatasetEntry {
  fs::path path;
  DataType dtype = DataType::Tabular;
  std::optional<fs::path> associated;
  std::string id;
};

struct RunConfig {
  std::vector<DatasetEntry> datasets;
  fs::path design_space;
  fs::path type_encoding_map;
  fs::path viability_matrix;
  fs::path templates;
  std::vector<std::string> user_fields;
  double min_jaccard = 0.0;
  double lambda = kDefaultDecay;
  SlotLimits limits;
  std::size_t max_charts = kDefaultMaxCharts;
  std::size_t max_views_per_component = kDefaultMaxViewsPerComponent;
  std::uint64_t seed = 0;
  fs::path output_dir = "gevitrec_out";

  /// Relative paths resolve against base_dir; the four model files default
  /// to the shipped copies in data_dir.
  static RunConfig from_json(const nlohmann::json& j, const fs::path& base_dir, const fs::path& data_dir) {
    if (!j.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");
    auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base_dir / p; };
    RunConfig c;
    try {
      for (const auto& d : j.value("datasets", nlohmann::json::array())) {
        DatasetEntry e;
        e.path = resolve(d.at("path").get<std::string>());
        e.dtype = parse_data_type(d.at("dtype").get<std::string>());
        if (d.contains("associated") && !d["associated"].is_null()) {
          e.associated = resolve(d["associated"].get<std::string>());
        }
        e.id = d.value("id", std::string());
        c.datasets.push_back(std::move(e));
      }
      auto model = [&](const char* key, const char* file) {
        return j.contains(key) ? resolve(j[key].get<std::string>()) : data_dir / file;
      };
      c.design_space = model("design_space", "design_space_genepi.csv");
      c.type_encoding_map = model("type_encoding_map", "type_encoding_map.json");
      c.viability_matrix = model("viability_matrix", "viability_matrix.csv");
      c.templates = model("templates", "chart_templates.json");
      c.user_fields = j.value("user_fields", std::vector<std::string>{});
      c.min_jaccard = j.value("min_jaccard", c.min_jaccard);
      c.lambda = j.value("lambda", c.lambda);
      c.limits.highcard_threshold = j.value("highcard_threshold", c.limits.highcard_threshold);
      c.limits.color_card_limit = j.value("color_card_limit", c.limits.color_card_limit);
      c.max_charts = j.value("max_charts", c.max_charts);
      c.max_views_per_component = j.value("max_views_per_component", c.max_views_per_component);
      c.seed = j.value("seed", c.seed);
      if (j.contains("output_dir")) c.output_dir = resolve(j["output_dir"].get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ConfigError, std::string("config: ") + e.what());
    }
    return c;
  }

  static RunConfig load(const fs::path& path, const fs::path& data_dir) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text::read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
    return from_json(j, path.parent_path(), data_dir);
  }

  void validate() const {
    if (!(min_jaccard >= 0.0 && min_jaccard < 1.0)) throw Error(ErrorCode::ConfigError, "min_jaccard must be in [0, 1)");
    if (!(lambda > 0.0 && lambda <= 1.0)) throw Error(ErrorCode::ConfigError, "lambda must be in (0, 1]");
    if (max_charts < 1 || max_charts > kDefaultMaxCharts) throw Error(ErrorCode::ConfigError, "max_charts must be in [1, 5]");
    if (max_views_per_component < 1) throw Error(ErrorCode::ConfigError, "max_views_per_component must be positive");
    if (limits.highcard_threshold < 1 || limits.color_card_limit < 1) {
      throw Error(ErrorCode::ConfigError, "cardinality limits must be positive");
    }
    for (const auto& d : datasets) {
      if (!fs::exists(d.path)) throw Error(ErrorCode::FileNotFound, "file not found: " + d.path.string());
      if (d.associated && !fs::exists(*d.associated)) {
        throw Error(ErrorCode::FileNotFound, "file not found: " + d.associated->string());
      }
    }
  }

  /// Canonical form of every knob, used for the provenance hash.
  nlohmann::json to_json() const {
    nlohmann::json ds = nlohmann::json::array();
    for (const auto& d : datasets) {
      ds.push_back({{"path", d.path.generic_string()},
                    {"dtype", std::string(to_string(d.dtype))},
                    {"associated", d.associated ? nlohmann::json(d.associated->generic_string()) : nlohmann::json()},
                    {"id", d.id}});
    }
    return {{"datasets", ds},
            {"design_space", design_space.generic_string()},
            {"type_encoding_map", type_encoding_map.generic_string()},
            {"viability_matrix", viability_matrix.generic_string()},
            {"templates", templates.generic_string()},
            {"user_fields", user_fields},
            {"min_jaccard", min_jaccard},
            {"lambda", lambda},
            {"highcard_threshold", limits.highcard_threshold},
            {"color_card_limit", limits.color_card_limit},
            {"max_charts", max_charts},
            {"max_views_per_component", max_views_per_component},
            {"seed", seed}};
  }

  std::string hash() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(text::fnv1a(to_json().dump())));
    return buf;
  }
};

/// Loaded sources and their linkage. Owns everything the catalog points at.
struct LinkedData {
  std::vector<Dataset> datasets;
  ExplodedFields exploded;
  EntityGraph graph;
  Catalog catalog;

  LinkedData() = default;
  LinkedData(const LinkedData&) = delete;
  LinkedData& operator=(const LinkedData&) = delete;
};

inline std::unique_ptr<LinkedData> link_datasets(std::vector<Dataset> datasets, double min_jaccard = 0.0) {
  auto out = std::make_unique<LinkedData>();
  out->datasets = std::move(datasets);
  out->exploded = explode_fields(out->datasets);
  out->graph = build_entity_graph(out->exploded.fields, min_jaccard);
  out->catalog = Catalog(out->datasets, out->exploded.fields);
  return out;
}

inline std::vector<Dataset> load_datasets(const RunConfig& cfg) {
  std::vector<Dataset> out;
  for (const auto& d : cfg.datasets) {
    try {
      out.push_back(load_dataset(d.path, d.dtype, d.associated, d.id));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::FileNotFound) throw;
      throw Error(e.code(), d.path.string() + ": " + e.what());
    }
  }
  return out;
}

/// The design-side models: relevance, type map, viability and templates.
struct Models {
  RelevanceTable relevance;
  TypeEncodingMap type_map;
  ViabilityMatrix matrix;
  std::vector<ChartTemplate> templates;
};

inline RelevanceTable load_relevance(const RunConfig& cfg) {
  auto space = PrevalenceDesignSpace::from_csv(text::read_file(cfg.design_space));
  return relevance_table(space, cfg.lambda);
}

inline Models load_models(const RunConfig& cfg) {
  Models m;
  m.relevance = load_relevance(cfg);
  auto parse_json = [](const fs::path& p) {
    try {
      return nlohmann::json::parse(text::read_file(p));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::ParseError, p.string() + ": " + e.what());
    }
  };
  m.type_map = TypeEncodingMap::from_json(parse_json(cfg.type_encoding_map));
  m.type_map.validate(m.relevance);
  m.matrix = ViabilityMatrix::from_csv(text::read_file(cfg.viability_matrix));
  m.templates = templates_from_json(parse_json(cfg.templates));
  validate_templates(m.templates, m.relevance, m.type_map);
  return m;
}

struct ViewOptions {
  std::vector<std::string> user_fields;
  SlotLimits limits;
  std::size_t max_charts = kDefaultMaxCharts;
  std::size_t max_views_per_component = kDefaultMaxViewsPerComponent;
  std::uint64_t seed = 0;
};

inline ViewOptions view_options(const RunConfig& cfg) {
  return {cfg.user_fields, cfg.limits, cfg.max_charts, cfg.max_views_per_component, cfg.seed};
}

/// One coordinated view built from one ranked path.
struct View {
  std::size_t index = 0;      // 1-based position in the emitted list
  std::size_t path_rank = 0;  // 1-based position in the ranked path list
  RankedPath ranked;
  std::uint64_t seed = 0;
  std::vector<ChartSpec> specs;  // finalized
  CombinationPlan plan;
  ViewLayout layout;
  std::vector<std::string> unknown_user_fields;
};

/// Singleton specs for the path's sources, truncated to max_charts by relevance.
inline std::vector<ChartSpec> path_specs(const RankedPath& rp, const LinkedData& data, const Models& models,
                                         const ViewOptions& opt, std::vector<std::string>* unknown = nullptr) {
  const auto& g = data.graph;
  std::vector<std::string> order = rp.path.source_ids(g);
  std::vector<DataType> types;
  for (auto h : rp.path.hubs) types.push_back(g.hubs[h].dtype);
  std::vector<FieldWithDegree> fields;
  for (std::size_t s = 0; s < g.spokes.size(); ++s) {
    if (std::find(rp.path.hubs.begin(), rp.path.hubs.end(), g.spokes[s].hub) == rp.path.hubs.end()) continue;
    fields.push_back({&data.catalog.field(g.spokes[s].field), g.spoke_degree(s)});
  }
  auto priority = prioritize_fields(fields, opt.user_fields);
  if (unknown) *unknown = priority.unknown_user_fields;
  auto specs = generate_single_chart_specs(order, types, priority.order, models.templates, models.type_map,
                                           models.relevance, opt.limits);
  return truncate_specs(std::move(specs), opt.max_charts);
}

inline std::optional<View> build_view(const RankedPath& rp, std::size_t path_rank, const LinkedData& data,
                                      const Models& models, const ViewOptions& opt) {
  View v;
  v.ranked = rp;
  v.path_rank = path_rank;
  v.seed = derive_seed(opt.seed, path_rank);
  auto specs = path_specs(rp, data, models, opt, &v.unknown_user_fields);
  if (specs.empty()) return std::nullopt;
  auto classes = FieldClasses::from_graph(data.graph, rp.path.hubs);
  v.plan = plan_combination(specs, models.matrix, classes, data.catalog, v.seed);
  v.specs = bind_alignment(std::move(specs), v.plan);
  v.layout = arrange_grid(v.plan, v.specs, opt.max_charts);
  return v;
}

/// Ranked views, at most max_views_per_component per component.
inline std::vector<View> build_views(const LinkedData& data, const Models& models, const ViewOptions& opt) {
  std::vector<View> out;
  if (data.graph.hubs.empty()) return out;
  auto ranked = rank_paths(data.graph, models.relevance, models.type_map);
  std::map<std::size_t, std::size_t> per_component;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    auto& count = per_component[ranked[i].path.component_id];
    if (count >= opt.max_views_per_component) continue;
    if (auto v = build_view(ranked[i], i + 1, data, models, opt)) {
      v->index = out.size() + 1;
      ++count;
      out.push_back(std::move(*v));
    }
  }
  return out;
}

inline nlohmann::json view_json(const View& v, const EntityGraph& g) {
  nlohmann::json specs = nlohmann::json::array();
  for (const auto& s : v.specs) specs.push_back(chart_spec_json(s));
  return {{"view", v.index},
          {"path_rank", v.path_rank},
          {"component", v.ranked.path.component_id},
          {"seed", v.seed},
          {"path", path_json(v.ranked, g)},
          {"plan", combination_plan_json(v.plan)},
          {"specs", specs},
          {"layout", layout_json(v.layout)}};
}

inline nlohmann::json views_json(const std::vector<View>& views, const EntityGraph& g, std::uint64_t seed) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& v : views) arr.push_back(view_json(v, g));
  return {{"tool_version", std::string(kToolVersion)}, {"seed", seed}, {"views", arr}};
}

inline RenderedView render_full_view(const View& v, const LinkedData& data) {
  std::map<std::string, std::string> fragments;
  for (const auto& cell : v.layout.cells) {
    auto it = std::find_if(v.specs.begin(), v.specs.end(), [&](const ChartSpec& s) { return s.id == cell.spec_id; });
    if (it == v.specs.end()) continue;
    fragments[cell.spec_id] = render_chart(*it, data.catalog);
  }
  nlohmann::json provenance = {{"view", v.index},
                               {"path_rank", v.path_rank},
                               {"path", v.ranked.path.source_ids(data.graph)},
                               {"path_score", v.ranked.path_score},
                               {"metrics", {{"p_s", v.ranked.p_s}, {"p_d", v.ranked.p_d}, {"p_vr", v.ranked.p_vr}}},
                               {"seed", v.seed},
                               {"tool_version", std::string(kToolVersion)}};
  std::string title = "View " + std::to_string(v.index) + ": ";
  auto ids = v.ranked.path.source_ids(data.graph);
  for (std::size_t i = 0; i < ids.size(); ++i) title += (i ? " - " : "") + ids[i];
  return render_view(v.layout, fragments, std::move(provenance), title);
}

}  // namespace gevitrec
