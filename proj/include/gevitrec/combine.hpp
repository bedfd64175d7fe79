#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gevitrec/catalog.hpp"
#include "gevitrec/chartspec.hpp"
#include "gevitrec/csv.hpp"
#include "gevitrec/entity_graph.hpp"
#include "gevitrec/error.hpp"
#include "gevitrec/text.hpp"

namespace gevitrec {

// ---------------------------------------------------------------------------
// Viability matrix

enum class Viability { Supported, PossibleUnsupported, Impossible };

/// Square chart-type matrix of spatial-alignment feasibility.
/// Chart types absent from the matrix never align.
struct ViabilityMatrix {
  std::vector<std::string> chart_types;
  std::vector<std::vector<Viability>> cells;

  std::optional<std::size_t> index(std::string_view chart) const {
    for (std::size_t i = 0; i < chart_types.size(); ++i) {
      if (chart_types[i] == chart) return i;
    }
    return std::nullopt;
  }

  bool contains(std::string_view chart) const { return index(chart).has_value(); }

  Viability at(std::string_view a, std::string_view b) const {
    auto i = index(a), j = index(b);
    if (!i || !j) return Viability::Impossible;
    return cells[*i][*j];
  }

  bool supported(std::string_view a, std::string_view b) const { return at(a, b) == Viability::Supported; }

  /// CSV: header "chart_type,<t1>,<t2>,..."; one row per type, cells S, P or N.
  static ViabilityMatrix from_csv(std::string_view src) {
    auto table = csv::parse(src, "viability matrix");
    ViabilityMatrix m;
    for (std::size_t c = 1; c < table.header.size(); ++c) m.chart_types.push_back(std::string(text::trim(table.header[c])));
    if (table.rows.size() != m.chart_types.size()) {
      throw Error(ErrorCode::ParseError, "viability matrix: must be square");
    }
    m.cells.assign(m.chart_types.size(), std::vector<Viability>(m.chart_types.size(), Viability::Impossible));
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      if (text::trim(table.rows[r][0]) != m.chart_types[r]) {
        throw Error(ErrorCode::ParseError, "viability matrix: row " + std::to_string(r + 1) +
                                               " label does not match column order");
      }
      for (std::size_t c = 1; c < table.rows[r].size(); ++c) {
        auto v = text::trim(table.rows[r][c]);
        if (v == "S") {
          m.cells[r][c - 1] = Viability::Supported;
        } else if (v == "P") {
          m.cells[r][c - 1] = Viability::PossibleUnsupported;
        } else if (v == "N" || v.empty()) {
          m.cells[r][c - 1] = Viability::Impossible;
        } else {
          throw Error(ErrorCode::ParseError, "viability matrix: bad cell '" + std::string(v) + "'");
        }
      }
    }
    for (std::size_t i = 0; i < m.cells.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (m.cells[i][j] != m.cells[j][i]) {
          throw Error(ErrorCode::ParseError, "viability matrix: not symmetric at (" + m.chart_types[i] + ", " +
                                                 m.chart_types[j] + ")");
        }
      }
    }
    return m;
  }
};

inline constexpr std::array<std::string_view, 3> kImmutableCharts = {"phylogenetic_tree", "geographic_map", "image"};

/// Trees, geographic maps and images cannot be reoriented or reordered.
inline bool is_immutable_chart(std::string_view chart) {
  return std::find(kImmutableCharts.begin(), kImmutableCharts.end(), chart) != kImmutableCharts.end();
}

// ---------------------------------------------------------------------------
// Field equivalence

/// Fields joined by linkages within a set of sources count as the same
/// entity for alignment. Each class is represented by its smallest FieldRef.
struct FieldClasses {
  std::map<FieldRef, FieldRef> rep;

  FieldRef of(const FieldRef& f) const {
    auto it = rep.find(f);
    return it == rep.end() ? f : it->second;
  }

  static FieldClasses from_graph(const EntityGraph& g, std::span<const std::size_t> hubs) {
    std::set<std::size_t> hub_set(hubs.begin(), hubs.end());
    std::map<FieldRef, FieldRef> parent;
    auto find = [&](FieldRef x) {
      while (parent.count(x) && parent[x] != x) x = parent[x];
      return x;
    };
    for (const auto& l : g.links) {
      if (!hub_set.count(g.spokes[l.a].hub) || !hub_set.count(g.spokes[l.b].hub)) continue;
      auto a = g.spokes[l.a].field, b = g.spokes[l.b].field;
      parent.try_emplace(a, a);
      parent.try_emplace(b, b);
      auto ra = find(a), rb = find(b);
      if (ra != rb) {
        if (rb < ra) std::swap(ra, rb);
        parent[rb] = ra;
      }
    }
    FieldClasses out;
    for (const auto& [f, _] : parent) out.rep[f] = find(f);
    return out;
  }
};

// ---------------------------------------------------------------------------
// Palette

inline constexpr std::array<std::string_view, 12> kCategoricalPalette = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#aec7e8", "#ffbb78"};

/// Category -> color by index in the sorted category set, cycling after 12.
inline std::map<std::string, std::string> categorical_palette(std::vector<std::string> categories) {
  std::sort(categories.begin(), categories.end());
  categories.erase(std::unique(categories.begin(), categories.end()), categories.end());
  std::map<std::string, std::string> out;
  for (std::size_t i = 0; i < categories.size(); ++i) {
    out[categories[i]] = std::string(kCategoricalPalette[i % kCategoricalPalette.size()]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Combination plan

struct SpatialGroup {
  std::vector<std::string> members;  // lead first, then supports by relevance
  std::string lead;
  FieldRef shared;                            // equivalence-class representative
  std::string shared_label;                   // display name for the shared axis
  std::map<std::string, FieldRef> member_fields;  // spec id -> its bound shared field
  Channel axis = Channel::Y;
  std::vector<std::string> categories;
  std::optional<std::pair<double, double>> numeric_domain;
};

struct ColorGroup {
  std::vector<std::string> members;
  FieldRef shared;
  std::string shared_label;
  std::map<std::string, std::string> palette;
};

struct CombinationPlan {
  std::optional<SpatialGroup> spatial;
  std::vector<ColorGroup> color_groups;
  std::vector<std::string> unaligned;
  std::uint64_t seed = 0;
};

/// Seeded lead choice per path: the PRNG depends only on (seed, path rank).
inline std::uint64_t derive_seed(std::uint64_t global_seed, std::uint64_t path_rank) {
  return global_seed ^ (0x9E3779B97F4A7C15ULL * (path_rank + 1));
}

/// The unique positionally immutable member if any, else a seeded uniform pick.
inline std::string select_lead_chart(std::span<const ChartSpec* const> group, std::uint64_t seed) {
  if (group.empty()) throw Error(ErrorCode::InvalidArgument, "cannot select a lead from an empty group");
  const ChartSpec* immutable = nullptr;
  for (const auto* s : group) {
    if (!is_immutable_chart(s->chart_type)) continue;
    if (immutable) {
      throw Error(ErrorCode::MultipleImmutable,
                  "group holds both '" + immutable->id + "' and '" + s->id + "'");
    }
    immutable = s;
  }
  if (immutable) return immutable->id;
  std::mt19937_64 rng(seed);
  return group[rng() % group.size()]->id;
}

namespace detail {

inline std::vector<std::pair<Channel, FieldRef>> positional_bindings(const ChartSpec& s) {
  std::vector<std::pair<Channel, FieldRef>> out;
  for (auto c : {Channel::X, Channel::Y}) {
    if (auto f = s.bound(c)) out.emplace_back(c, *f);
  }
  return out;
}

inline std::string label_for(std::span<const FieldRef> fields, const Catalog& catalog) {
  for (const auto& f : fields) {
    if (catalog.has_field(f) && !catalog.field(f).is_key) return f.name;
  }
  return fields.empty() ? std::string() : fields.front().name;
}

}  // namespace detail

/// Largest set of specs sharing one positional field (up to linkage), pairwise
/// supported by the matrix, with at most one immutable chart. Ties go to the
/// higher summed relevance. The lead and domain are resolved here too.
inline std::optional<SpatialGroup> which_spatially_align(std::span<const ChartSpec> specs,
                                                         const ViabilityMatrix& matrix,
                                                         const FieldClasses& classes, const Catalog& catalog,
                                                         std::uint64_t seed = 0) {
  if (specs.size() > 16) throw Error(ErrorCode::InvalidArgument, "too many specs for alignment search");
  std::set<FieldRef> candidate_classes;
  for (const auto& s : specs) {
    for (const auto& [c, f] : detail::positional_bindings(s)) candidate_classes.insert(classes.of(f));
  }

  struct Best {
    std::vector<std::size_t> members;
    FieldRef cls;
    double relevance = 0;
  };
  std::optional<Best> best;

  for (const auto& cls : candidate_classes) {
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < specs.size(); ++i) {
      if (!matrix.contains(specs[i].chart_type)) continue;
      for (const auto& [c, f] : detail::positional_bindings(specs[i])) {
        if (classes.of(f) == cls) {
          eligible.push_back(i);
          break;
        }
      }
    }
    const std::size_t n = eligible.size();
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
      std::vector<std::size_t> members;
      for (std::size_t k = 0; k < n; ++k) {
        if (mask & (1u << k)) members.push_back(eligible[k]);
      }
      if (members.size() < 2) continue;
      std::size_t immutables = 0;
      bool ok = true;
      double rel = 0;
      for (std::size_t a = 0; a < members.size() && ok; ++a) {
        immutables += is_immutable_chart(specs[members[a]].chart_type) ? 1 : 0;
        rel += specs[members[a]].relevance;
        for (std::size_t b = a + 1; b < members.size() && ok; ++b) {
          ok = matrix.supported(specs[members[a]].chart_type, specs[members[b]].chart_type);
        }
      }
      if (!ok || immutables > 1) continue;
      bool take = !best || members.size() > best->members.size() ||
                  (members.size() == best->members.size() && rel > best->relevance + 1e-12) ||
                  (members.size() == best->members.size() && std::abs(rel - best->relevance) <= 1e-12 &&
                   std::tie(members, cls) < std::tie(best->members, best->cls));
      if (take) best = Best{members, cls, rel};
    }
  }
  if (!best) return std::nullopt;

  SpatialGroup group;
  group.shared = best->cls;
  std::vector<const ChartSpec*> members;
  for (auto i : best->members) members.push_back(&specs[i]);
  group.lead = select_lead_chart(members, seed);
  const ChartSpec* lead = nullptr;
  for (const auto* m : members) {
    if (m->id == group.lead) lead = m;
  }
  group.members.push_back(lead->id);
  for (const auto* m : members) {
    if (m != lead) group.members.push_back(m->id);
  }
  std::vector<FieldRef> ordered_fields;
  for (const auto& id : group.members) {
    const auto& spec = *std::find_if(specs.begin(), specs.end(), [&](const ChartSpec& s) { return s.id == id; });
    for (const auto& [c, f] : detail::positional_bindings(spec)) {
      if (classes.of(f) == group.shared) {
        group.member_fields[id] = f;
        ordered_fields.push_back(f);
        if (&spec == lead) group.axis = c;
        break;
      }
    }
  }
  group.shared_label = detail::label_for(ordered_fields, catalog);

  // Shared domain: the lead's own order, extended by anything only the
  // supports carry; numeric axes take the union range.
  const Field& lead_field = catalog.field(group.member_fields[lead->id]);
  if (lead_field.numeric()) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& f : ordered_fields) {
      for (const auto& raw : catalog.column(f)) {
        if (auto v = text::parse_number(raw)) {
          lo = std::min(lo, *v);
          hi = std::max(hi, *v);
        }
      }
    }
    group.numeric_domain = std::make_pair(lo, hi);
  } else {
    std::vector<std::string> order;
    std::set<std::string> seen;
    if (is_immutable_chart(lead->chart_type)) {
      for (const auto& raw : catalog.column(group.member_fields[lead->id])) {
        if (text::is_missing(raw)) continue;
        std::string v(text::trim(raw));
        if (seen.insert(v).second) order.push_back(v);
      }
    }
    std::set<std::string> extra;
    for (const auto& f : ordered_fields) {
      for (const auto& v : catalog.field(f).values) {
        if (!seen.count(v)) extra.insert(v);
      }
    }
    order.insert(order.end(), extra.begin(), extra.end());
    group.categories = std::move(order);
  }
  return group;
}

/// Groups specs whose color channel carries the same field (linked, same name);
/// one palette per group over the sorted union of categories.
inline std::vector<ColorGroup> which_color_align(std::span<const ChartSpec> specs, const FieldClasses& classes,
                                                 const Catalog& catalog) {
  // Same name and linked: "country" in two sources groups, "country" and
  // "location" never do even when their values overlap.
  using Key = std::pair<FieldRef, std::string>;
  std::map<Key, std::vector<std::size_t>> by_class;
  std::vector<Key> first_seen;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    auto f = specs[i].bound(Channel::Color);
    if (!f) continue;
    Key key{classes.of(*f), f->name};
    if (!by_class.count(key)) first_seen.push_back(key);
    by_class[key].push_back(i);
  }
  std::vector<ColorGroup> out;
  for (const auto& key : first_seen) {
    const auto& idx = by_class[key];
    if (idx.size() < 2) continue;
    ColorGroup g;
    g.shared = key.first;
    std::vector<std::string> categories;
    std::vector<FieldRef> fields;
    for (auto i : idx) {
      g.members.push_back(specs[i].id);
      auto f = *specs[i].bound(Channel::Color);
      fields.push_back(f);
      const auto& vals = catalog.field(f).values;
      categories.insert(categories.end(), vals.begin(), vals.end());
    }
    g.shared_label = detail::label_for(fields, catalog);
    g.palette = categorical_palette(std::move(categories));
    out.push_back(std::move(g));
  }
  return out;
}

inline CombinationPlan plan_combination(std::span<const ChartSpec> specs, const ViabilityMatrix& matrix,
                                        const FieldClasses& classes, const Catalog& catalog, std::uint64_t seed) {
  CombinationPlan plan;
  plan.seed = seed;
  plan.spatial = which_spatially_align(specs, matrix, classes, catalog, seed);
  plan.color_groups = which_color_align(specs, classes, catalog);
  std::set<std::string> aligned;
  if (plan.spatial) aligned.insert(plan.spatial->members.begin(), plan.spatial->members.end());
  for (const auto& g : plan.color_groups) aligned.insert(g.members.begin(), g.members.end());
  for (const auto& s : specs) {
    if (!aligned.count(s.id)) plan.unaligned.push_back(s.id);
  }
  return plan;
}

/// Gradual binding: rotates spatial supports onto the lead's axis, stamps the
/// shared domain and color palettes, and marks every spec render-ready.
/// Idempotent.
inline std::vector<ChartSpec> bind_alignment(std::vector<ChartSpec> specs, const CombinationPlan& plan) {
  if (plan.spatial) {
    const auto& g = *plan.spatial;
    std::size_t immutables = 0;
    for (auto& s : specs) {
      auto it = g.member_fields.find(s.id);
      if (it == g.member_fields.end()) continue;
      if (is_immutable_chart(s.chart_type)) ++immutables;
      const FieldRef& field = it->second;
      std::optional<Channel> on;
      for (auto c : {Channel::X, Channel::Y}) {
        if (s.bound(c) == field) {
          if (on) throw Error(ErrorCode::UnresolvableOrientation, s.id + " binds the shared field on both axes");
          on = c;
        }
      }
      if (!on) throw Error(ErrorCode::InvalidArgument, s.id + " does not carry the shared field positionally");
      if (*on != g.axis) {
        if (is_immutable_chart(s.chart_type)) {
          throw Error(ErrorCode::UnresolvableOrientation, s.id + " is positionally immutable");
        }
        auto x = s.bound(Channel::X), y = s.bound(Channel::Y);
        s.bindings.erase(Channel::X);
        s.bindings.erase(Channel::Y);
        if (x) s.bindings[Channel::Y] = *x;
        if (y) s.bindings[Channel::X] = *y;
        for (auto& r : s.required) {
          if (r == Channel::X) r = Channel::Y;
          else if (r == Channel::Y) r = Channel::X;
        }
        s.swapped = !s.swapped;
      }
      s.lead = s.id == g.lead;
      s.alignment = AxisAlignment{g.axis, g.shared_label, g.categories, g.numeric_domain};
    }
    if (immutables > 1) throw Error(ErrorCode::MultipleImmutable, "spatial group holds more than one immutable chart");
  }
  for (const auto& cg : plan.color_groups) {
    for (auto& s : specs) {
      if (std::find(cg.members.begin(), cg.members.end(), s.id) != cg.members.end()) s.palette = cg.palette;
    }
  }
  for (auto& s : specs) {
    s.complete = all_required_bound(s);
    s.finalized = s.complete;
  }
  return specs;
}

inline nlohmann::json combination_plan_json(const CombinationPlan& plan) {
  using nlohmann::json;
  json j = json::object();
  j["seed"] = plan.seed;
  if (plan.spatial) {
    const auto& g = *plan.spatial;
    json s = {{"members", g.members},
              {"lead", g.lead},
              {"shared_field", g.shared_label},
              {"axis", std::string(to_string(g.axis))},
              {"categories", g.categories}};
    if (g.numeric_domain) s["numeric_domain"] = {g.numeric_domain->first, g.numeric_domain->second};
    j["spatial_group"] = s;
  } else {
    j["spatial_group"] = nullptr;
  }
  json groups = json::array();
  for (const auto& g : plan.color_groups) {
    groups.push_back({{"members", g.members}, {"shared_field", g.shared_label}, {"palette", g.palette}});
  }
  j["color_groups"] = groups;
  j["unaligned"] = plan.unaligned;
  return j;
}

}  // namespace gevitrec
