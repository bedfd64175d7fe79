#include <algorithm>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "support/fixtures.hpp"
#include "support/invariants.hpp"

using namespace gevitrec;
using fixtures::code_of;
using fixtures::spec;
using fixtures::TempDir;

namespace {

// Tree with leaf order s3, s1, s2; a case table and a lane image keyed on the
// same samples; a country map and a country table.
struct Scenario {
  TempDir dir;
  std::unique_ptr<LinkedData> data;
  FieldClasses classes;

  Scenario() {
    dir.write("tree.nwk", "(s3:0.1,(s1:0.1,s2:0.2):0.1);");
    dir.write("meta.csv", "sample_id,country\ns1,GIN\ns2,SLE\ns3,GIN\n");
    dir.write("cases.csv", "sample_id,location,age,onset\ns1,North,30,2017-01-02\ns2,South,41,2017-01-03\n"
                           "s3,North,25,2017-01-02\ns4,East,60,2017-01-05\n");
    dir.write("lanes.csv", "sample_id,lane\ns1,1\ns2,2\ns3,3\n");
    dir.write("gel.png", "not really a png");
    dir.write("regions.geojson",
              R"({"type":"FeatureCollection","features":[)"
              R"({"type":"Feature","geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,0]]]},"properties":{"country":"GIN","pop":5}},)"
              R"({"type":"Feature","geometry":{"type":"Polygon","coordinates":[[[1,0],[2,0],[2,1],[1,0]]]},"properties":{"country":"SLE","pop":7}}]})");
    dir.write("counts.csv", "country,n\nGIN,3\nSLE,4\nLBR,1\n");
    std::vector<Dataset> ds;
    ds.push_back(load_dataset(dir.path() / "tree.nwk", DataType::Tree, dir.path() / "meta.csv", "tree"));
    ds.push_back(load_dataset(dir.path() / "cases.csv", DataType::Tabular, std::nullopt, "cases"));
    ds.push_back(load_dataset(dir.path() / "gel.png", DataType::Image, dir.path() / "lanes.csv", "gel"));
    ds.push_back(load_dataset(dir.path() / "regions.geojson", DataType::Spatial, std::nullopt, "regions"));
    ds.push_back(load_dataset(dir.path() / "counts.csv", DataType::Tabular, std::nullopt, "counts"));
    data = link_datasets(std::move(ds));
    std::vector<std::size_t> hubs(data->graph.hubs.size());
    for (std::size_t i = 0; i < hubs.size(); ++i) hubs[i] = i;
    classes = FieldClasses::from_graph(data->graph, hubs);
  }

  const Catalog& catalog() const { return data->catalog; }
};

const ViabilityMatrix& matrix() { return fixtures::default_models().matrix; }

}  // namespace

TEST(Viability, ShippedMatrixShape) {
  const auto& m = matrix();
  for (const auto& a : m.chart_types) {
    EXPECT_TRUE(m.supported(a, a)) << a;
    for (const auto& b : m.chart_types) EXPECT_EQ(m.at(a, b), m.at(b, a));
  }
  for (const char* absent : {"image", "node_link", "pie", "venn"}) EXPECT_FALSE(m.contains(absent)) << absent;
  EXPECT_TRUE(m.supported("phylogenetic_tree", "scatter"));
  EXPECT_TRUE(m.supported("phylogenetic_tree", "heatmap"));
  EXPECT_EQ(m.at("geographic_map", "bar"), Viability::Impossible);
  EXPECT_EQ(m.at("image", "phylogenetic_tree"), Viability::Impossible);
}

TEST(Viability, CsvValidation) {
  EXPECT_EQ(code_of([] { ViabilityMatrix::from_csv("chart_type,a,b\na,S,P\nb,N,S\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { ViabilityMatrix::from_csv("chart_type,a,b\na,S,P\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { ViabilityMatrix::from_csv("chart_type,a\na,Q\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { ViabilityMatrix::from_csv("chart_type,a,b\nb,S,N\na,N,S\n"); }), ErrorCode::ParseError);
  auto m = ViabilityMatrix::from_csv("chart_type,a,b\na,S,\nb,,S\n");
  EXPECT_EQ(m.at("a", "b"), Viability::Impossible);
}

TEST(SpatialAlign, TreeScatterHeatmapGroupLedByTree) {
  Scenario sc;
  std::vector<ChartSpec> specs = {
      spec("tree", "phylogenetic_tree", {{Channel::Y, "tree.tip_label"}}),
      spec("cases", "scatter", {{Channel::X, "age"}, {Channel::Y, "sample_id"}}),
      spec("cases", "heatmap", {{Channel::X, "onset"}, {Channel::Y, "sample_id"}}),
  };
  auto g = which_spatially_align(specs, matrix(), sc.classes, sc.catalog(), 42);
  ASSERT_TRUE(g.has_value());
  EXPECT_EQ(g->members.size(), 3u);
  EXPECT_EQ(g->lead, "tree/phylogenetic_tree");
  EXPECT_EQ(g->members.front(), g->lead);
  EXPECT_EQ(g->axis, Channel::Y);
  EXPECT_EQ(g->shared_label, "sample_id");
  // Lead order first, then categories only the supports carry.
  EXPECT_EQ(g->categories, (std::vector<std::string>{"s3", "s1", "s2", "s4"}));
}

TEST(SpatialAlign, TreeAndImageNeverAlign) {
  Scenario sc;
  std::vector<ChartSpec> specs = {spec("tree", "phylogenetic_tree", {{Channel::Y, "tree.tip_label"}}),
                                  spec("gel", "image", {{Channel::X, "sample_id"}})};
  EXPECT_FALSE(which_spatially_align(specs, matrix(), sc.classes, sc.catalog()).has_value());
}

TEST(SpatialAlign, MapAndBarImpossible) {
  Scenario sc;
  std::vector<ChartSpec> specs = {spec("regions", "geographic_map", {{Channel::X, "country"}}),
                                  spec("counts", "bar", {{Channel::X, "country"}})};
  ASSERT_EQ(matrix().at("geographic_map", "bar"), Viability::Impossible);
  EXPECT_FALSE(which_spatially_align(specs, matrix(), sc.classes, sc.catalog()).has_value());
}

TEST(SpatialAlign, NumericSharedAxisTakesUnionRange) {
  Scenario sc;
  std::vector<ChartSpec> specs = {spec("cases", "scatter", {{Channel::X, "age"}, {Channel::Y, "location"}}),
                                  spec("cases", "line", {{Channel::X, "age"}, {Channel::Y, "age"}})};
  specs[1].bindings[Channel::Y] = FieldRef{"cases", "onset"};
  auto g = which_spatially_align(specs, matrix(), sc.classes, sc.catalog(), 1);
  ASSERT_TRUE(g.has_value());
  ASSERT_TRUE(g->numeric_domain.has_value());
  EXPECT_DOUBLE_EQ(g->numeric_domain->first, 25.0);
  EXPECT_DOUBLE_EQ(g->numeric_domain->second, 60.0);
  EXPECT_EQ(g->axis, Channel::X);
}

TEST(SpatialAlign, TooManySpecsRejected) {
  Scenario sc;
  std::vector<ChartSpec> specs(17, spec("cases", "scatter", {{Channel::X, "age"}, {Channel::Y, "sample_id"}}));
  EXPECT_EQ(code_of([&] { which_spatially_align(specs, matrix(), sc.classes, sc.catalog()); }),
            ErrorCode::InvalidArgument);
}

TEST(SpatialAlign, NoPositionalOverlapGivesNone) {
  Scenario sc;
  std::vector<ChartSpec> specs = {spec("cases", "histogram", {{Channel::X, "age"}})};
  EXPECT_FALSE(which_spatially_align(specs, matrix(), sc.classes, sc.catalog()).has_value());
}

TEST(LeadChart, ImmutableWins) {
  auto t = spec("tree", "phylogenetic_tree", {{Channel::Y, "tree.tip_label"}});
  auto s = spec("cases", "scatter", {{Channel::X, "age"}, {Channel::Y, "sample_id"}});
  auto h = spec("cases", "heatmap", {{Channel::X, "onset"}, {Channel::Y, "sample_id"}});
  std::vector<const ChartSpec*> group = {&s, &t, &h};
  for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, 999ULL}) EXPECT_EQ(select_lead_chart(group, seed), t.id);
}

TEST(LeadChart, SeededChoiceIsDeterministicAndCoversMembers) {
  auto s = spec("cases", "scatter", {{Channel::X, "age"}, {Channel::Y, "sample_id"}});
  auto h = spec("cases", "heatmap", {{Channel::X, "onset"}, {Channel::Y, "sample_id"}});
  std::vector<const ChartSpec*> group = {&s, &h};
  EXPECT_EQ(select_lead_chart(group, 42), select_lead_chart(group, 42));
  std::set<std::string> seen;
  for (std::uint64_t seed = 0; seed < 64; ++seed) seen.insert(select_lead_chart(group, seed));
  EXPECT_EQ(seen.size(), 2u);
}

TEST(LeadChart, Errors) {
  std::vector<const ChartSpec*> none;
  EXPECT_EQ(code_of([&] { select_lead_chart(none, 1); }), ErrorCode::InvalidArgument);
  auto t = spec("tree", "phylogenetic_tree", {{Channel::Y, "tree.tip_label"}});
  auto m = spec("regions", "geographic_map", {{Channel::X, "country"}});
  std::vector<const ChartSpec*> two = {&t, &m};
  EXPECT_EQ(code_of([&] { select_lead_chart(two, 1); }), ErrorCode::MultipleImmutable);
}

TEST(LeadChart, DerivedSeedDependsOnRank) {
  EXPECT_EQ(derive_seed(42, 1), derive_seed(42, 1));
  EXPECT_NE(derive_seed(42, 1), derive_seed(42, 2));
  EXPECT_NE(derive_seed(42, 1), derive_seed(43, 1));
}

TEST(ColorAlign, TreeAndMapShareCountryPalette) {
  Scenario sc;
  std::vector<ChartSpec> specs = {
      spec("tree", "phylogenetic_tree", {{Channel::Y, "tree.tip_label"}, {Channel::Color, "country"}}),
      spec("regions", "geographic_map", {{Channel::X, "country"}, {Channel::Color, "country"}})};
  auto groups = which_color_align(specs, sc.classes, sc.catalog());
  ASSERT_EQ(groups.size(), 1u);
  EXPECT_EQ(groups[0].members.size(), 2u);
  EXPECT_EQ(groups[0].palette, categorical_palette({"GIN", "SLE"}));
  EXPECT_EQ(groups[0].palette.at("GIN"), std::string(kCategoricalPalette[0]));
  EXPECT_EQ(groups[0].palette.at("SLE"), std::string(kCategoricalPalette[1]));
}

TEST(ColorAlign, NoColorBindingsGiveNothing) {
  Scenario sc;
  std::vector<ChartSpec> specs = {spec("cases", "scatter", {{Channel::X, "age"}, {Channel::Y, "sample_id"}})};
  EXPECT_TRUE(which_color_align(specs, sc.classes, sc.catalog()).empty());
}

TEST(ColorAlign, DifferentFieldsDoNotGroup) {
  Scenario sc;
  std::vector<ChartSpec> specs = {
      spec("tree", "phylogenetic_tree", {{Channel::Y, "tree.tip_label"}, {Channel::Color, "country"}}),
      spec("cases", "scatter", {{Channel::X, "age"}, {Channel::Y, "sample_id"}, {Channel::Color, "location"}})};
  EXPECT_TRUE(which_color_align(specs, sc.classes, sc.catalog()).empty());
}

TEST(Palette, StableUnderPermutationAndCycles) {
  std::vector<std::string> cats;
  for (int i = 0; i < 14; ++i) cats.push_back("c" + std::to_string(10 + i));
  auto base = categorical_palette(cats);
  std::mt19937 rng(8);
  for (int i = 0; i < 20; ++i) {
    auto shuffled = cats;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    shuffled.push_back(shuffled.front());
    EXPECT_EQ(categorical_palette(shuffled), base);
  }
  EXPECT_EQ(base.at("c10"), std::string(kCategoricalPalette[0]));
  EXPECT_EQ(base.at("c22"), std::string(kCategoricalPalette[0]));
  std::set<std::string> colors(kCategoricalPalette.begin(), kCategoricalPalette.end());
  EXPECT_EQ(colors.size(), 12u);
}

TEST(BindAlignment, SupportTakesLeadLeafOrder) {
  Scenario sc;
  std::vector<ChartSpec> specs = {spec("tree", "phylogenetic_tree", {{Channel::Y, "tree.tip_label"}}),
                                  spec("cases", "scatter", {{Channel::X, "age"}, {Channel::Y, "sample_id"}})};
  auto plan = plan_combination(specs, matrix(), sc.classes, sc.catalog(), 3);
  auto bound = bind_alignment(specs, plan);
  ASSERT_TRUE(bound[1].alignment.has_value());
  EXPECT_EQ(bound[1].alignment->axis, Channel::Y);
  EXPECT_EQ(std::vector<std::string>(bound[1].alignment->categories.begin(), bound[1].alignment->categories.begin() + 3),
            (std::vector<std::string>{"s3", "s1", "s2"}));
  EXPECT_EQ(bound[0].alignment, bound[1].alignment);
  EXPECT_TRUE(bound[0].lead);
  EXPECT_FALSE(bound[1].lead);
  EXPECT_TRUE(bound[0].finalized && bound[1].finalized);
}

TEST(BindAlignment, SupportOnOtherAxisIsSwapped) {
  Scenario sc;
  std::vector<ChartSpec> specs = {spec("tree", "phylogenetic_tree", {{Channel::Y, "tree.tip_label"}}),
                                  spec("cases", "scatter", {{Channel::X, "sample_id"}, {Channel::Y, "age"}})};
  auto plan = plan_combination(specs, matrix(), sc.classes, sc.catalog(), 3);
  ASSERT_TRUE(plan.spatial.has_value());
  auto bound = bind_alignment(specs, plan);
  EXPECT_TRUE(bound[1].swapped);
  EXPECT_EQ(bound[1].bound(Channel::Y)->name, "sample_id");
  EXPECT_EQ(bound[1].bound(Channel::X)->name, "age");

  // The rendered axes follow the swap.
  auto svg = render_chart(bound[1], sc.catalog());
  auto labels = fixtures::texts_with_class(svg, "axis-label");
  ASSERT_EQ(labels.size(), 2u);
  EXPECT_NE(std::find(labels.begin(), labels.end(), "age"), labels.end());
  auto y_ticks = fixtures::elements_with_class(svg, "tick");
  std::vector<std::string> cats;
  for (const auto& t : y_ticks) {
    if (fixtures::attr(t, "data-axis") == "y") cats.push_back(fixtures::attr(t, "data-category"));
  }
  EXPECT_EQ(cats, bound[1].alignment->categories);
}

TEST(BindAlignment, ColorOnlyPlanStampsPalettes) {
  Scenario sc;
  std::vector<ChartSpec> specs = {
      spec("tree", "phylogenetic_tree", {{Channel::Y, "tree.tip_label"}, {Channel::Color, "country"}}),
      spec("regions", "geographic_map", {{Channel::X, "country"}, {Channel::Color, "country"}})};
  auto plan = plan_combination(specs, matrix(), sc.classes, sc.catalog(), 3);
  EXPECT_FALSE(plan.spatial.has_value());
  auto bound = bind_alignment(specs, plan);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    EXPECT_EQ(bound[i].bindings, specs[i].bindings);
    EXPECT_FALSE(bound[i].swapped);
    EXPECT_FALSE(bound[i].alignment.has_value());
    EXPECT_EQ(bound[i].palette, plan.color_groups[0].palette);
  }
}

TEST(BindAlignment, ImmutableSupportCannotRotate) {
  Scenario sc;
  auto scatter = spec("cases", "scatter", {{Channel::X, "sample_id"}, {Channel::Y, "age"}});
  auto tree = spec("tree", "phylogenetic_tree", {{Channel::Y, "tree.tip_label"}});
  CombinationPlan plan;
  SpatialGroup g;
  g.members = {scatter.id, tree.id};
  g.lead = scatter.id;
  g.axis = Channel::X;
  g.member_fields = {{scatter.id, {"cases", "sample_id"}}, {tree.id, {"tree", "tree.tip_label"}}};
  plan.spatial = g;
  std::vector<ChartSpec> specs = {scatter, tree};
  EXPECT_EQ(code_of([&] { bind_alignment(specs, plan); }), ErrorCode::UnresolvableOrientation);
}

TEST(BindAlignment, SharedFieldOnBothAxesIsUnresolvable) {
  auto both = spec("cases", "heatmap", {{Channel::X, "sample_id"}, {Channel::Y, "sample_id"}});
  auto lead = spec("tree", "phylogenetic_tree", {{Channel::Y, "tree.tip_label"}});
  CombinationPlan plan;
  SpatialGroup g;
  g.members = {lead.id, both.id};
  g.lead = lead.id;
  g.axis = Channel::Y;
  g.member_fields = {{lead.id, {"tree", "tree.tip_label"}}, {both.id, {"cases", "sample_id"}}};
  plan.spatial = g;
  std::vector<ChartSpec> specs = {lead, both};
  EXPECT_EQ(code_of([&] { bind_alignment(specs, plan); }), ErrorCode::UnresolvableOrientation);
}

TEST(BindAlignment, IdempotentAndUnalignedUntouched) {
  Scenario sc;
  std::vector<ChartSpec> specs = {spec("tree", "phylogenetic_tree", {{Channel::Y, "tree.tip_label"}}),
                                  spec("cases", "scatter", {{Channel::X, "sample_id"}, {Channel::Y, "age"}}),
                                  spec("cases", "histogram", {{Channel::X, "age"}}),
                                  spec("counts", "bar", {{Channel::X, "country"}})};
  specs[3].complete = false;
  auto plan = plan_combination(specs, matrix(), sc.classes, sc.catalog(), 9);
  auto once = bind_alignment(specs, plan);
  EXPECT_EQ(bind_alignment(once, plan), once);
  for (const auto& id : plan.unaligned) {
    auto a = *invariants::find_spec(once, id), b = *invariants::find_spec(specs, id);
    b.complete = a.complete;
    b.finalized = a.finalized;
    EXPECT_EQ(a, b) << id;
  }
  EXPECT_TRUE(invariants::find_spec(once, "counts/bar")->complete);
}

TEST(Plan, JsonShape) {
  Scenario sc;
  std::vector<ChartSpec> specs = {spec("tree", "phylogenetic_tree", {{Channel::Y, "tree.tip_label"}}),
                                  spec("cases", "scatter", {{Channel::X, "age"}, {Channel::Y, "sample_id"}}),
                                  spec("cases", "histogram", {{Channel::X, "age"}})};
  auto plan = plan_combination(specs, matrix(), sc.classes, sc.catalog(), 5);
  auto j = combination_plan_json(plan);
  EXPECT_EQ(j["seed"], 5);
  EXPECT_EQ(j["spatial_group"]["lead"], "tree/phylogenetic_tree");
  EXPECT_EQ(j["spatial_group"]["axis"], "y");
  EXPECT_EQ(j["unaligned"], nlohmann::json::array({"cases/histogram"}));
  plan.spatial.reset();
  EXPECT_TRUE(combination_plan_json(plan)["spatial_group"].is_null());
}

TEST(Combine, InvariantsHoldAcrossRandomCorpora) {
  const auto& models = fixtures::default_models();
  std::mt19937 rng(31337);
  std::size_t views = 0, grouped = 0;
  for (int trial = 0; trial < 40; ++trial) {
    TempDir dir;
    auto data = link_datasets(fixtures::random_corpus(dir, rng, "c"));
    ViewOptions opt;
    opt.seed = std::uint64_t(trial);
    for (const auto& v : build_views(*data, models, opt)) {
      ++views;
      grouped += v.plan.spatial ? 1 : 0;
      auto bad = invariants::check_view(v, *data, models, opt);
      EXPECT_TRUE(bad.empty()) << bad.front();
    }
  }
  EXPECT_GT(views, 0u);
  EXPECT_GT(grouped, 0u);
}
