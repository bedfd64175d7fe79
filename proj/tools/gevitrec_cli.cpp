// gevitrec: recommend coordinated chart views for a collection of linked datasets.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gevitrec/gevitrec.hpp"

#ifndef GEVITREC_DATA_DIR
#define GEVITREC_DATA_DIR "data"
#endif

namespace {

namespace fs = std::filesystem;
using namespace gevitrec;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInput = 2;
constexpr int kExitUsage = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> user_fields;
  std::optional<std::size_t> max_charts;
  std::optional<double> min_jaccard;
  std::optional<double> lambda;
  std::size_t view = 1;
};

RunConfig effective_config(const Options& o) {
  const char* env = std::getenv("GEVITREC_DATA_DIR");
  RunConfig cfg = RunConfig::load(o.config, env && *env ? fs::path(env) : fs::path(GEVITREC_DATA_DIR));
  if (o.out) cfg.output_dir = *o.out;
  if (o.seed) cfg.seed = *o.seed;
  if (!o.user_fields.empty()) cfg.user_fields = o.user_fields;
  if (o.max_charts) cfg.max_charts = *o.max_charts;
  if (o.min_jaccard) cfg.min_jaccard = *o.min_jaccard;
  if (o.lambda) cfg.lambda = *o.lambda;
  cfg.validate();
  return cfg;
}

class Run {
 public:
  Run(std::string command, const RunConfig& cfg) : command_(std::move(command)), cfg_(cfg) {}

  void write(const std::string& name, const std::string& content) {
    text::write_file(cfg_.output_dir / name, content);
    outputs_.push_back(name);
    std::cout << (cfg_.output_dir / name).string() << "\n";
  }

  void write_json(const std::string& name, const nlohmann::json& j) { write(name, j.dump(2) + "\n"); }

  void finish() {
    nlohmann::json m = {{"tool_version", std::string(kToolVersion)},
                        {"command", command_},
                        {"config_hash", cfg_.hash()},
                        {"seed", cfg_.seed},
                        {"outputs", outputs_}};
    text::write_file(cfg_.output_dir / "manifest.json", m.dump(2) + "\n");
  }

 private:
  std::string command_;
  const RunConfig& cfg_;
  std::vector<std::string> outputs_;
};

std::string view_name(std::size_t index, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "view_%03zu.%s", index, ext);
  return buf;
}

void cmd_link(const RunConfig& cfg) {
  auto data = link_datasets(load_datasets(cfg), cfg.min_jaccard);
  Run run("link", cfg);
  run.write_json("entity_graph.json", entity_graph_json(data->graph));
  run.write("field_metadata.csv", data->exploded.metadata.to_csv());
  run.finish();
}

void cmd_graph(const RunConfig& cfg) {
  auto data = link_datasets(load_datasets(cfg), cfg.min_jaccard);
  Run run("graph", cfg);
  run.write("entity_graph.svg", render_entity_graph(data->graph));
  run.finish();
}

void warn_unknown(const std::vector<View>& views) {
  std::set<std::string> unknown;
  for (const auto& v : views) unknown.insert(v.unknown_user_fields.begin(), v.unknown_user_fields.end());
  for (const auto& u : unknown) std::cerr << "warning: user field '" << u << "' not found on any path\n";
}

void cmd_specs(const RunConfig& cfg) {
  auto data = link_datasets(load_datasets(cfg), cfg.min_jaccard);
  auto models = load_models(cfg);
  auto views = build_views(*data, models, view_options(cfg));
  warn_unknown(views);
  Run run("specs", cfg);
  nlohmann::json ranked = nlohmann::json::array();
  if (!data->graph.hubs.empty()) {
    ranked = ranked_paths_json(rank_paths(data->graph, models.relevance, models.type_map), data->graph);
  }
  run.write_json("ranked_paths.json", ranked);
  run.write_json("views.json", views_json(views, data->graph, cfg.seed));
  run.finish();
}

void cmd_render(const RunConfig& cfg, std::size_t index) {
  auto data = link_datasets(load_datasets(cfg), cfg.min_jaccard);
  auto models = load_models(cfg);
  auto views = build_views(*data, models, view_options(cfg));
  if (index < 1 || index > views.size()) {
    throw UsageError("view " + std::to_string(index) + " out of range (" + std::to_string(views.size()) +
                     " views)");
  }
  const auto& v = views[index - 1];
  auto rendered = render_full_view(v, *data);
  Run run("render", cfg);
  run.write(view_name(index, "svg"), rendered.svg);
  run.write_json(view_name(index, "json"), view_json(v, data->graph));
  run.finish();
}

void cmd_relevance(const RunConfig& cfg) {
  auto rel = load_relevance(cfg);
  Run run("relevance", cfg);
  run.write("relevance.csv", rel.to_csv());
  run.finish();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recommend coordinated chart views for linked datasets"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  Options o;
  app.add_option("-c,--config", o.config, "Run configuration (JSON)")->required();
  app.add_option("-o,--out", o.out, "Output directory (overrides the config)");
  app.add_option("--seed", o.seed, "Seed for lead-chart selection");
  app.add_option("--user-field", o.user_fields, "Field to prioritize (repeatable)")
      ->expected(1)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  app.add_option("--max-charts", o.max_charts, "Charts per view (1-5)");
  app.add_option("--min-jaccard", o.min_jaccard, "Minimum Jaccard index for a linkage");
  app.add_option("--lambda", o.lambda, "Temporal decay for relevance scores");

  auto* link = app.add_subcommand("link", "Explode fields and write the entity graph JSON");
  auto* graph = app.add_subcommand("graph", "Draw the entity graph as SVG");
  auto* specs = app.add_subcommand("specs", "Rank paths and write the view specifications");
  auto* render = app.add_subcommand("render", "Render one view to SVG");
  render->add_option("--view", o.view, "1-based view index")->required();
  auto* relevance = app.add_subcommand("relevance", "Write the chart-type relevance table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    RunConfig cfg = effective_config(o);
    if (link->parsed()) cmd_link(cfg);
    if (graph->parsed()) cmd_graph(cfg);
    if (specs->parsed()) cmd_specs(cfg);
    if (render->parsed()) cmd_render(cfg, o.view);
    if (relevance->parsed()) cmd_relevance(cfg);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.is_input_error() ? kExitInput : kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}
