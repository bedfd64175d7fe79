#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "gevitrec/entity_graph.hpp"
#include "gevitrec/svg.hpp"

namespace gevitrec {

/// Hub-and-spoke drawing: square hubs on a ring, circular spokes fanned
/// around their hub. Linkages are thick solid when exact and dashed when
/// inexact; source-field edges are thin solid.
inline std::string render_entity_graph(const EntityGraph& g) {
  const double width = 900, height = 700;
  const double cx = width / 2, cy = height / 2;
  const double hub_ring = g.hubs.size() <= 1 ? 0.0 : 220.0;
  const double spoke_ring = 95.0;

  std::vector<std::pair<double, double>> pos(g.node_count());
  std::vector<std::size_t> spokes_per_hub(g.hubs.size(), 0), seen(g.hubs.size(), 0);
  for (const auto& s : g.spokes) ++spokes_per_hub[s.hub];
  for (std::size_t h = 0; h < g.hubs.size(); ++h) {
    double a = 2 * std::numbers::pi * double(h) / double(std::max<std::size_t>(g.hubs.size(), 1)) -
               std::numbers::pi / 2;
    pos[h] = {cx + hub_ring * std::cos(a), cy + hub_ring * std::sin(a)};
  }
  for (std::size_t s = 0; s < g.spokes.size(); ++s) {
    auto h = g.spokes[s].hub;
    // Fan spokes away from the centre of the canvas.
    double base = g.hubs.size() <= 1 ? -std::numbers::pi / 2
                                     : std::atan2(pos[h].second - cy, pos[h].first - cx);
    double spread = g.hubs.size() <= 1 ? 2 * std::numbers::pi : std::numbers::pi * 1.2;
    double n = double(spokes_per_hub[h]);
    double a = n <= 1 ? base : base - spread / 2 + spread * double(seen[h]) / (g.hubs.size() <= 1 ? n : n - 1);
    ++seen[h];
    pos[g.spoke_node(s)] = {pos[h].first + spoke_ring * std::cos(a), pos[h].second + spoke_ring * std::sin(a)};
  }

  svg::Writer w;
  w.open_document(width, height);
  w.rect(0, 0, width, height, {{"fill", "#ffffff"}, {"class", "background"}});

  w.open_group({{"class", "edges"}});
  for (std::size_t s = 0; s < g.spokes.size(); ++s) {
    auto a = pos[g.spokes[s].hub], b = pos[g.spoke_node(s)];
    w.line(a.first, a.second, b.first, b.second,
           {{"class", "edge source-field"}, {"stroke", "#999999"}, {"stroke-width", "1"}});
  }
  for (const auto& l : g.links) {
    auto a = pos[g.spoke_node(l.a)], b = pos[g.spoke_node(l.b)];
    bool exact = l.weight >= kExactMatch;
    if (exact) {
      w.line(a.first, a.second, b.first, b.second,
             {{"class", "edge link-exact"}, {"stroke", "#222222"}, {"stroke-width", "4"},
              {"data-weight", text::fixed(l.weight, 3)}});
    } else {
      w.line(a.first, a.second, b.first, b.second,
             {{"class", "edge link-inexact"}, {"stroke", "#222222"}, {"stroke-width", "2"},
              {"stroke-dasharray", "6,4"}, {"data-weight", text::fixed(l.weight, 3)}});
    }
  }
  w.close_group();

  w.open_group({{"class", "nodes"}});
  for (std::size_t h = 0; h < g.hubs.size(); ++h) {
    auto [x, y] = pos[h];
    w.rect(x - 14, y - 14, 28, 28,
           {{"class", "hub"}, {"fill", "#4e79a7"}, {"stroke", "#1f3b57"}, {"data-id", g.hubs[h].dataset_id}});
    w.text(x, y - 20, g.hubs[h].dataset_id + " (" + std::string(to_string(g.hubs[h].dtype)) + ")",
           {{"class", "hub-label"}, {"font-size", "12"}, {"text-anchor", "middle"}, {"font-weight", "bold"}});
  }
  for (std::size_t s = 0; s < g.spokes.size(); ++s) {
    auto [x, y] = pos[g.spoke_node(s)];
    bool numeric = g.spokes[s].kind == FieldKind::Numeric;
    w.circle(x, y, 7,
             {{"class", "spoke"}, {"fill", numeric ? "#ffffff" : "#f28e2b"}, {"stroke", "#7f4a14"},
              {"data-id", g.node_id(g.spoke_node(s))}});
    w.text(x, y + 18, g.spokes[s].field.name,
           {{"class", "spoke-label"}, {"font-size", "10"}, {"text-anchor", "middle"}});
  }
  w.close_group();
  w.close_document();
  return w.str();
}

}  // namespace gevitrec
