#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gevitrec/chartspec.hpp"
#include "gevitrec/combine.hpp"
#include "gevitrec/error.hpp"
#include "gevitrec/render.hpp"
#include "gevitrec/svg.hpp"
#include "gevitrec/text.hpp"

namespace gevitrec {

inline constexpr std::size_t kDefaultMaxCharts = 5;
inline constexpr std::size_t kRowWidth = 3;
inline constexpr double kViewMargin = 16;
inline constexpr double kViewHeader = 44;

struct GridCell {
  std::string spec_id;
  std::size_t row = 0;
  std::size_t col = 0;
  std::size_t colspan = 1;
};

struct RowAnnotation {
  std::size_t row = 0;
  std::string text;
};

struct ViewLayout {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<GridCell> cells;
  double width = 2 * kViewMargin;
  double height = kViewHeader + kViewMargin;
  std::vector<RowAnnotation> annotations;
};

struct RenderedView {
  std::string svg;
  nlohmann::json provenance;
};

/// Keeps at most max_charts specs: spatial members first, then the rest by
/// descending relevance (stable).
inline std::vector<ChartSpec> truncate_specs(std::vector<ChartSpec> specs, std::size_t max_charts,
                                             const std::set<std::string>& keep_first = {}) {
  std::stable_sort(specs.begin(), specs.end(), [&](const ChartSpec& a, const ChartSpec& b) {
    bool ka = keep_first.count(a.id) > 0, kb = keep_first.count(b.id) > 0;
    if (ka != kb) return ka;
    return a.relevance > b.relevance;
  });
  if (specs.size() > max_charts) specs.resize(max_charts);
  return specs;
}

/// Spatial group left-to-right in row 0 with the lead leftmost; everything
/// else fills the following rows by descending relevance, three per row.
inline ViewLayout arrange_grid(const CombinationPlan& plan, std::span<const ChartSpec> specs,
                               std::size_t max_charts = kDefaultMaxCharts) {
  if (max_charts == 0) throw Error(ErrorCode::InvalidArgument, "max_charts must be positive");
  std::set<std::string> spatial;
  if (plan.spatial) spatial.insert(plan.spatial->members.begin(), plan.spatial->members.end());
  auto kept = truncate_specs(std::vector<ChartSpec>(specs.begin(), specs.end()), max_charts, spatial);

  std::vector<std::vector<std::string>> rows;
  std::set<std::string> placed;
  if (plan.spatial) {
    std::vector<std::string> row0;
    for (const auto& id : plan.spatial->members) {
      bool present = std::any_of(kept.begin(), kept.end(), [&](const ChartSpec& s) { return s.id == id; });
      if (present) {
        row0.push_back(id);
        placed.insert(id);
      }
    }
    if (!row0.empty()) rows.push_back(std::move(row0));
  }
  std::vector<std::string> rest;
  for (const auto& s : kept) {
    if (!placed.count(s.id)) rest.push_back(s.id);
  }
  for (std::size_t i = 0; i < rest.size(); i += kRowWidth) {
    rows.emplace_back(rest.begin() + long(i), rest.begin() + long(std::min(rest.size(), i + kRowWidth)));
  }

  ViewLayout layout;
  layout.rows = rows.size();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    layout.cols = std::max(layout.cols, rows[r].size());
    for (std::size_t c = 0; c < rows[r].size(); ++c) layout.cells.push_back({rows[r][c], r, c, 1});
  }
  if (plan.spatial && !rows.empty() && rows[0].size() > 1) {
    layout.annotations.push_back({0, "combo_axis_var: " + plan.spatial->shared_label});
  }
  layout.width = 2 * kViewMargin + double(layout.cols) * kCellWidth;
  layout.height = kViewHeader + kViewMargin + double(layout.rows) * kCellHeight;
  return layout;
}

inline std::string cdata(const std::string& s) {
  std::string out = "<![CDATA[";
  std::size_t start = 0;
  for (auto pos = s.find("]]>"); pos != std::string::npos; pos = s.find("]]>", start)) {
    out += s.substr(start, pos - start) + "]]]]><![CDATA[>";
    start = pos + 3;
  }
  return out + s.substr(start) + "]]>";
}

/// Places each fragment at its cell and embeds the provenance JSON.
inline RenderedView render_view(const ViewLayout& layout, const std::map<std::string, std::string>& fragments,
                                nlohmann::json provenance, const std::string& title = {}) {
  svg::Writer w;
  w.open_document(layout.width, layout.height);
  w.raw("<metadata>" + cdata(provenance.dump()) + "</metadata>\n");
  w.rect(0, 0, layout.width, layout.height, {{"class", "background"}, {"fill", "#fafafa"}});
  if (!title.empty()) {
    w.text(kViewMargin, 20, title, {{"class", "view-title"}, {"font-size", "14"}, {"font-weight", "bold"}});
  }
  for (const auto& a : layout.annotations) {
    w.text(kViewMargin, kViewHeader - 6 + double(a.row) * kCellHeight, a.text,
           {{"class", "combo_axis_var"}, {"data-row", std::to_string(a.row)}, {"font-size", "11"},
            {"font-style", "italic"}});
  }
  for (const auto& cell : layout.cells) {
    auto it = fragments.find(cell.spec_id);
    if (it == fragments.end()) throw Error(ErrorCode::MissingFragment, "no fragment for '" + cell.spec_id + "'");
    w.open_group_at(kViewMargin + double(cell.col) * kCellWidth, kViewHeader + double(cell.row) * kCellHeight,
                    {{"class", "view-cell"}, {"data-row", std::to_string(cell.row)}, {"data-col", std::to_string(cell.col)}});
    w.raw(it->second);
    w.close_group();
  }
  w.close_document();
  return {std::move(w.str()), std::move(provenance)};
}

inline nlohmann::json layout_json(const ViewLayout& layout) {
  using nlohmann::json;
  json cells = json::array();
  for (const auto& c : layout.cells) {
    cells.push_back({{"spec", c.spec_id}, {"row", c.row}, {"col", c.col}, {"colspan", c.colspan}});
  }
  json ann = json::array();
  for (const auto& a : layout.annotations) ann.push_back({{"row", a.row}, {"text", a.text}});
  return {{"rows", layout.rows},
          {"cols", layout.cols},
          {"width", layout.width},
          {"height", layout.height},
          {"cells", cells},
          {"annotations", ann}};
}

}  // namespace gevitrec
