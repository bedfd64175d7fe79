#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "gevitrec/dataset.hpp"
#include "gevitrec/error.hpp"
#include "gevitrec/fields.hpp"

namespace gevitrec {

// ---------------------------------------------------------------------------
// Jaccard index

/// |a ∩ b| / |a ∪ b| over two sorted, duplicate-free ranges.
inline double jaccard_sorted(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptySet, "jaccard of an empty set");
  std::size_t i = 0, j = 0, common = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++common;
      ++i;
      ++j;
    }
  }
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

inline double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::vector<std::string> va(a.begin(), a.end()), vb(b.begin(), b.end());
  return jaccard_sorted(va, vb);
}

// ---------------------------------------------------------------------------
// Graph

struct SourceHub {
  std::string dataset_id;
  DataType dtype = DataType::Tabular;
};

struct FieldSpoke {
  FieldRef field;
  FieldKind kind = FieldKind::NonNumeric;
  std::size_t hub = 0;
};

/// Field-field linkage between spokes of different hubs; a < b.
struct Linkage {
  std::size_t a = 0;
  std::size_t b = 0;
  double weight = 0.0;
};

inline constexpr double kExactMatch = 1.0;

/// Hub-and-spoke entity graph. Node ids: hubs occupy [0, H), spokes [H, H+S).
/// Hubs are sorted by dataset id, spokes by (source id, field name), so the
/// structure is canonical regardless of input order.
struct EntityGraph {
  std::vector<SourceHub> hubs;
  std::vector<FieldSpoke> spokes;
  std::vector<Linkage> links;

  std::size_t node_count() const { return hubs.size() + spokes.size(); }
  std::size_t spoke_node(std::size_t spoke) const { return hubs.size() + spoke; }
  bool is_hub(std::size_t node) const { return node < hubs.size(); }
  std::size_t spoke_of(std::size_t node) const { return node - hubs.size(); }

  std::size_t owner_hub(std::size_t node) const {
    return is_hub(node) ? node : spokes[spoke_of(node)].hub;
  }

  std::string node_id(std::size_t node) const {
    if (is_hub(node)) return hubs[node].dataset_id;
    const auto& f = spokes[spoke_of(node)].field;
    return f.source_id + "::" + f.name;
  }

  std::optional<std::size_t> hub_index(std::string_view dataset_id) const {
    for (std::size_t i = 0; i < hubs.size(); ++i) {
      if (hubs[i].dataset_id == dataset_id) return i;
    }
    return std::nullopt;
  }

  std::optional<std::size_t> spoke_index(const FieldRef& ref) const {
    auto it = std::lower_bound(spokes.begin(), spokes.end(), ref,
                               [](const FieldSpoke& s, const FieldRef& r) { return s.field < r; });
    if (it == spokes.end() || it->field != ref) return std::nullopt;
    return static_cast<std::size_t>(it - spokes.begin());
  }

  /// Node degree of a spoke: its source edge plus its linkages.
  std::size_t spoke_degree(std::size_t spoke) const {
    std::size_t d = 1;
    for (const auto& l : links) d += (l.a == spoke || l.b == spoke) ? 1 : 0;
    return d;
  }

  bool operator==(const EntityGraph& o) const {
    if (hubs.size() != o.hubs.size() || spokes.size() != o.spokes.size() ||
        links.size() != o.links.size()) {
      return false;
    }
    for (std::size_t i = 0; i < hubs.size(); ++i) {
      if (hubs[i].dataset_id != o.hubs[i].dataset_id || hubs[i].dtype != o.hubs[i].dtype) return false;
    }
    for (std::size_t i = 0; i < spokes.size(); ++i) {
      if (spokes[i].field != o.spokes[i].field || spokes[i].kind != o.spokes[i].kind ||
          spokes[i].hub != o.spokes[i].hub) {
        return false;
      }
    }
    for (std::size_t i = 0; i < links.size(); ++i) {
      if (links[i].a != o.links[i].a || links[i].b != o.links[i].b || links[i].weight != o.links[i].weight) {
        return false;
      }
    }
    return true;
  }
};

/// One hub per source, one spoke per field, and a linkage for every
/// cross-source pair of non-numeric fields whose Jaccard index exceeds
/// min_jaccard. Numeric fields never link.
inline EntityGraph build_entity_graph(std::span<const Field> fields, double min_jaccard = 0.0) {
  if (!(min_jaccard >= 0.0 && min_jaccard < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "min_jaccard must lie in [0, 1)");
  }
  std::vector<const Field*> sorted;
  for (const auto& f : fields) sorted.push_back(&f);
  std::sort(sorted.begin(), sorted.end(), [](const Field* a, const Field* b) {
    return a->ref() < b->ref();
  });

  EntityGraph g;
  std::map<std::string, DataType> sources;
  for (const auto* f : sorted) sources.emplace(f->source_id, f->source_type);
  for (const auto& [id, dtype] : sources) g.hubs.push_back({id, dtype});
  std::map<std::string, std::size_t> hub_of;
  for (std::size_t i = 0; i < g.hubs.size(); ++i) hub_of[g.hubs[i].dataset_id] = i;

  for (const auto* f : sorted) {
    if (!g.spokes.empty() && g.spokes.back().field == f->ref()) {
      throw Error(ErrorCode::InvalidArgument,
                  "field '" + f->name + "' appears twice in source '" + f->source_id + "'");
    }
    g.spokes.push_back({f->ref(), f->kind, hub_of[f->source_id]});
  }

  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i]->numeric() || sorted[i]->values.empty()) continue;
    for (std::size_t j = i + 1; j < sorted.size(); ++j) {
      if (sorted[j]->numeric() || sorted[j]->values.empty()) continue;
      if (sorted[i]->source_id == sorted[j]->source_id) continue;
      double w = jaccard_sorted(sorted[i]->values, sorted[j]->values);
      if (w > 0.0 && w > min_jaccard) g.links.push_back({i, j, w});
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Components

struct Component {
  std::vector<std::size_t> hubs;    // ascending
  std::vector<std::size_t> spokes;  // ascending
  std::vector<std::size_t> links;   // indices into EntityGraph::links
};

/// Partition by connectivity, ordered by descending hub count, then by the
/// smallest dataset id.
inline std::vector<Component> connected_components(const EntityGraph& g) {
  std::vector<std::size_t> parent(g.hubs.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& l : g.links) {
    auto a = find(g.spokes[l.a].hub), b = find(g.spokes[l.b].hub);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::map<std::size_t, Component> by_root;
  for (std::size_t h = 0; h < g.hubs.size(); ++h) by_root[find(h)].hubs.push_back(h);
  for (std::size_t s = 0; s < g.spokes.size(); ++s) by_root[find(g.spokes[s].hub)].spokes.push_back(s);
  for (std::size_t i = 0; i < g.links.size(); ++i) by_root[find(g.spokes[g.links[i].a].hub)].links.push_back(i);

  std::vector<Component> out;
  for (auto& [root, c] : by_root) out.push_back(std::move(c));
  // Hubs are sorted by id, so hubs.front() is the lexicographically smallest.
  std::sort(out.begin(), out.end(), [](const Component& a, const Component& b) {
    if (a.hubs.size() != b.hubs.size()) return a.hubs.size() > b.hubs.size();
    return a.hubs.front() < b.hubs.front();
  });
  return out;
}

// ---------------------------------------------------------------------------
// Paths

struct PathEdge {
  std::size_t from = 0;  // node ids
  std::size_t to = 0;
  std::optional<double> weight;  // set for field-field linkages only

  bool operator==(const PathEdge&) const = default;
};

struct GraphPath {
  std::vector<std::size_t> nodes;
  std::vector<PathEdge> edges;
  std::vector<std::size_t> hubs;  // hubs whose nodes the path touches, first-visit order
  std::size_t component_id = 0;

  std::vector<double> link_weights() const {
    std::vector<double> w;
    for (const auto& e : edges) {
      if (e.weight) w.push_back(*e.weight);
    }
    return w;
  }

  std::vector<std::string> source_ids(const EntityGraph& g) const {
    std::vector<std::string> out;
    for (auto h : hubs) out.push_back(g.hubs[h].dataset_id);
    return out;
  }

  bool is_singleton() const { return edges.empty(); }
};

namespace detail {

struct PathLabel {
  double cost = 0.0;
  std::vector<std::size_t> hub_runs;  // hub ids in order of entry
  std::vector<std::size_t> nodes;
};

inline constexpr double kCostEpsilon = 1e-12;

// Strict "better than": lower cost, then fewer hub entries, then the
// lexicographically smaller hub sequence, then the smaller node sequence.
inline bool better(const PathLabel& a, const PathLabel& b) {
  if (a.cost < b.cost - kCostEpsilon) return true;
  if (b.cost < a.cost - kCostEpsilon) return false;
  if (a.hub_runs.size() != b.hub_runs.size()) return a.hub_runs.size() < b.hub_runs.size();
  if (a.hub_runs != b.hub_runs) return a.hub_runs < b.hub_runs;
  return a.nodes < b.nodes;
}

struct Adjacent {
  std::size_t node;
  double cost;
  std::optional<double> weight;
};

inline std::vector<std::vector<Adjacent>> adjacency(const EntityGraph& g) {
  std::vector<std::vector<Adjacent>> adj(g.node_count());
  for (std::size_t s = 0; s < g.spokes.size(); ++s) {
    auto hub = g.spokes[s].hub, node = g.spoke_node(s);
    adj[hub].push_back({node, 0.0, std::nullopt});
    adj[node].push_back({hub, 0.0, std::nullopt});
  }
  for (const auto& l : g.links) {
    auto a = g.spoke_node(l.a), b = g.spoke_node(l.b);
    adj[a].push_back({b, 1.0 - l.weight, l.weight});
    adj[b].push_back({a, 1.0 - l.weight, l.weight});
  }
  return adj;
}

/// Label-setting search from one hub. The label order is preserved under
/// extension, so the first label settled at each node is optimal.
inline std::vector<std::optional<PathLabel>> best_paths_from(
    const EntityGraph& g, const std::vector<std::vector<Adjacent>>& adj, std::size_t source) {
  std::vector<std::optional<PathLabel>> best(g.node_count());
  std::vector<bool> settled(g.node_count(), false);
  auto cmp = [](const std::pair<PathLabel, std::size_t>& x, const std::pair<PathLabel, std::size_t>& y) {
    return better(y.first, x.first);
  };
  std::priority_queue<std::pair<PathLabel, std::size_t>, std::vector<std::pair<PathLabel, std::size_t>>,
                      decltype(cmp)>
      queue(cmp);
  PathLabel start{0.0, {source}, {source}};
  best[source] = start;
  queue.emplace(std::move(start), source);
  while (!queue.empty()) {
    auto [label, node] = queue.top();
    queue.pop();
    if (settled[node]) continue;
    settled[node] = true;
    for (const auto& next : adj[node]) {
      if (settled[next.node]) continue;
      if (std::find(label.nodes.begin(), label.nodes.end(), next.node) != label.nodes.end()) continue;
      PathLabel ext = label;
      ext.cost += next.cost;
      ext.nodes.push_back(next.node);
      auto owner = g.owner_hub(next.node);
      if (ext.hub_runs.back() != owner) ext.hub_runs.push_back(owner);
      if (!best[next.node] || better(ext, *best[next.node])) {
        best[next.node] = ext;
        queue.emplace(std::move(ext), next.node);
      }
    }
  }
  return best;
}

inline GraphPath make_path(const EntityGraph& g, const std::vector<std::vector<Adjacent>>& adj,
                           const std::vector<std::size_t>& nodes, std::size_t component_id) {
  GraphPath p;
  p.nodes = nodes;
  p.component_id = component_id;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    std::optional<double> w;
    for (const auto& a : adj[nodes[i]]) {
      if (a.node == nodes[i + 1]) {
        w = a.weight;
        break;
      }
    }
    p.edges.push_back({nodes[i], nodes[i + 1], w});
  }
  for (auto n : nodes) {
    auto h = g.owner_hub(n);
    if (std::find(p.hubs.begin(), p.hubs.end(), h) == p.hubs.end()) p.hubs.push_back(h);
  }
  return p;
}

}  // namespace detail

/// Minimum-cost path (cost 1 - J per linkage, 0 per source edge) for every
/// unordered hub pair in the component, then one singleton path per hub.
/// Ties prefer fewer hubs, then the lexicographically smallest hub sequence.
inline std::vector<GraphPath> enumerate_paths(const EntityGraph& g, const Component& component,
                                              std::size_t component_id = 0) {
  auto adj = detail::adjacency(g);
  std::vector<GraphPath> out;
  std::set<std::pair<std::vector<std::size_t>, std::vector<std::pair<std::size_t, std::size_t>>>> seen;
  auto add = [&](GraphPath p) {
    auto hubs = p.hubs;
    std::sort(hubs.begin(), hubs.end());
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (const auto& e : p.edges) edges.emplace_back(std::min(e.from, e.to), std::max(e.from, e.to));
    std::sort(edges.begin(), edges.end());
    if (seen.emplace(std::move(hubs), std::move(edges)).second) out.push_back(std::move(p));
  };

  const auto& hubs = component.hubs;
  for (std::size_t i = 0; i < hubs.size(); ++i) {
    auto best = detail::best_paths_from(g, adj, hubs[i]);
    for (std::size_t j = i + 1; j < hubs.size(); ++j) {
      if (!best[hubs[j]]) continue;  // not reachable; caller passed a non-component
      add(detail::make_path(g, adj, best[hubs[j]]->nodes, component_id));
    }
  }
  for (auto h : hubs) add(detail::make_path(g, adj, {h}, component_id));
  return out;
}

// ---------------------------------------------------------------------------
// Export

inline nlohmann::json entity_graph_json(const EntityGraph& g) {
  using nlohmann::json;
  auto components = connected_components(g);
  std::vector<std::size_t> component_of(g.hubs.size());
  for (std::size_t c = 0; c < components.size(); ++c) {
    for (auto h : components[c].hubs) component_of[h] = c;
  }
  json nodes = json::array();
  for (std::size_t h = 0; h < g.hubs.size(); ++h) {
    nodes.push_back({{"id", g.hubs[h].dataset_id},
                     {"kind", "hub"},
                     {"dtype", std::string(to_string(g.hubs[h].dtype))},
                     {"component", component_of[h]}});
  }
  for (std::size_t s = 0; s < g.spokes.size(); ++s) {
    const auto& sp = g.spokes[s];
    nodes.push_back({{"id", g.node_id(g.spoke_node(s))},
                     {"kind", "field"},
                     {"source", sp.field.source_id},
                     {"field", sp.field.name},
                     {"field_kind", std::string(to_string(sp.kind))},
                     {"component", component_of[sp.hub]}});
  }
  json edges = json::array();
  for (std::size_t s = 0; s < g.spokes.size(); ++s) {
    edges.push_back({{"a", g.hubs[g.spokes[s].hub].dataset_id},
                     {"b", g.node_id(g.spoke_node(s))},
                     {"kind", "source-field"}});
  }
  for (const auto& l : g.links) {
    edges.push_back({{"a", g.node_id(g.spoke_node(l.a))},
                     {"b", g.node_id(g.spoke_node(l.b))},
                     {"kind", "field-field"},
                     {"weight", l.weight}});
  }
  json comps = json::array();
  for (const auto& c : components) {
    json ids = json::array();
    for (auto h : c.hubs) ids.push_back(g.hubs[h].dataset_id);
    comps.push_back(ids);
  }
  return {{"nodes", nodes}, {"edges", edges}, {"components", comps}};
}

}  // namespace gevitrec
