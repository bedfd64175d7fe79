#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "gevitrec/catalog.hpp"
#include "gevitrec/chartspec.hpp"
#include "gevitrec/combine.hpp"
#include "gevitrec/dataset.hpp"
#include "gevitrec/error.hpp"
#include "gevitrec/newick.hpp"
#include "gevitrec/svg.hpp"
#include "gevitrec/text.hpp"

namespace gevitrec {

inline constexpr double kCellWidth = 320.0;
inline constexpr double kCellHeight = 280.0;
inline constexpr std::size_t kHistogramBins = 10;

inline constexpr std::array<std::string_view, 5> kSequentialRamp = {"#eff3ff", "#bdd7e7", "#6baed6", "#3182bd",
                                                                    "#08519c"};
inline constexpr std::string_view kDefaultMark = "#4e79a7";
inline constexpr std::string_view kNoData = "#d9d9d9";

/// Index into the 5-step ramp for v within [lo, hi].
inline std::size_t ramp_step(double v, double lo, double hi) {
  if (!(hi > lo)) return kSequentialRamp.size() / 2;
  auto step = static_cast<long>(std::floor((v - lo) / (hi - lo) * double(kSequentialRamp.size())));
  return static_cast<std::size_t>(std::clamp<long>(step, 0, long(kSequentialRamp.size()) - 1));
}

namespace render_detail {

// Plot rectangle inside one cell. Every chart uses the same vertical extent
// so aligned rows line up.
inline constexpr double kTop = 34, kBottom = kCellHeight - 56, kLeft = 70, kRight = kCellWidth - 14;
inline constexpr double kLegendWidth = 78;

/// A positional scale: categorical bands or a linear numeric range.
struct Axis {
  Channel channel = Channel::X;
  std::string label;
  bool categorical = true;
  std::vector<std::string> categories;
  std::map<std::string, std::size_t> index;
  double lo = 0, hi = 1;
  double r0 = 0, r1 = 1;  // pixel positions of the first category / lo and the last / hi

  static Axis bands(Channel c, std::string label, std::vector<std::string> cats, double r0, double r1) {
    Axis a;
    a.channel = c;
    a.label = std::move(label);
    a.categories = std::move(cats);
    for (std::size_t i = 0; i < a.categories.size(); ++i) a.index.emplace(a.categories[i], i);
    a.r0 = r0;
    a.r1 = r1;
    return a;
  }

  static Axis linear(Channel c, std::string label, double lo, double hi, double r0, double r1) {
    Axis a;
    a.channel = c;
    a.label = std::move(label);
    a.categorical = false;
    if (!(hi > lo)) {
      lo -= 1;
      hi += 1;
    }
    a.lo = lo;
    a.hi = hi;
    a.r0 = r0;
    a.r1 = r1;
    return a;
  }

  double band() const {
    return categories.empty() ? std::abs(r1 - r0) : std::abs(r1 - r0) / double(categories.size());
  }

  std::optional<double> at_index(std::size_t i) const {
    if (i >= categories.size()) return std::nullopt;
    double dir = r1 >= r0 ? 1.0 : -1.0;
    return r0 + dir * (double(i) + 0.5) * band();
  }

  std::optional<double> at_value(double v) const { return r0 + (v - lo) / (hi - lo) * (r1 - r0); }

  std::optional<double> pos(std::string_view raw) const {
    if (text::is_missing(raw)) return std::nullopt;
    if (categorical) {
      auto it = index.find(std::string(text::trim(raw)));
      if (it == index.end()) return std::nullopt;
      return at_index(it->second);
    }
    auto v = text::parse_number(raw);
    if (!v) return std::nullopt;
    return at_value(*v);
  }
};

inline std::pair<double, double> numeric_range(const std::vector<std::string>& column) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& raw : column) {
    if (auto v = text::parse_number(raw)) {
      lo = std::min(lo, *v);
      hi = std::max(hi, *v);
    }
  }
  if (lo > hi) return {0, 1};
  return {lo, hi};
}

inline std::string axis_name(Channel c) { return std::string(to_string(c)); }

/// Categorical color assignment for one chart: the group palette when color
/// aligned, else a palette over the bound field's own categories.
struct ColorScale {
  std::map<std::string, std::string> palette;
  bool numeric = false;
  double lo = 0, hi = 1;

  std::string of(std::string_view raw) const {
    if (text::is_missing(raw)) return std::string(kNoData);
    if (numeric) {
      auto v = text::parse_number(raw);
      return v ? std::string(kSequentialRamp[ramp_step(*v, lo, hi)]) : std::string(kNoData);
    }
    auto it = palette.find(std::string(text::trim(raw)));
    return it == palette.end() ? std::string(kNoData) : it->second;
  }
};

class ChartRenderer {
 public:
  ChartRenderer(const ChartSpec& spec, const Catalog& catalog)
      : spec_(spec), catalog_(catalog), ds_(catalog.dataset(spec.dataset_id)) {
    for (const auto& [c, ref] : spec.bindings) {
      if (ref.source_id != spec.dataset_id) {
        throw Error(ErrorCode::DataMismatch, spec.id + " binds a field of another dataset: " + ref.name);
      }
      catalog.field(ref);
      ds_.records.column(ref.name);
    }
    if (auto c = spec.bound(Channel::Color)) {
      const Field& f = catalog.field(*c);
      color_.emplace();
      if (f.numeric()) {
        color_->numeric = true;
        std::tie(color_->lo, color_->hi) = numeric_range(column(*c));
      } else {
        color_->palette = spec.palette.empty() ? categorical_palette(f.values) : spec.palette;
      }
    }
    right_ = color_ ? kRight - kLegendWidth : kRight;
  }

  std::string render() {
    w_.open_group({{"class", "chart"},
                   {"data-spec", spec_.id},
                   {"data-chart-type", spec_.chart_type},
                   {"data-lead", spec_.lead ? "true" : "false"}});
    w_.rect(0.5, 0.5, kCellWidth - 1, kCellHeight - 1, {{"class", "frame"}, {"fill", "#ffffff"}, {"stroke", "#bbbbbb"}});
    w_.text(8, 18, spec_.chart_type + " (" + spec_.dataset_id + ")",
            {{"class", "chart-title"}, {"font-size", "12"}, {"font-weight", "bold"}});
    const auto& t = spec_.chart_type;
    if (t == "phylogenetic_tree") {
      tree();
    } else if (t == "scatter") {
      scatter();
    } else if (t == "bar") {
      bar();
    } else if (t == "histogram") {
      histogram();
    } else if (t == "heatmap") {
      heatmap();
    } else if (t == "line") {
      line();
    } else if (t == "table") {
      table();
    } else if (t == "geographic_map") {
      map();
    } else if (t == "genomic_alignment_table") {
      genomic();
    } else if (t == "image") {
      image();
    } else if (t == "node_link") {
      node_link();
    } else {
      throw Error(ErrorCode::UnsupportedChartType, "no renderer for chart type '" + t + "'");
    }
    legend();
    w_.close_group();
    return std::move(w_.str());
  }

 private:
  const std::vector<std::string>& column(const FieldRef& ref) const { return ds_.records.column(ref.name); }

  FieldRef need(Channel c) const {
    auto f = spec_.bound(c);
    if (!f) throw Error(ErrorCode::DataMismatch, spec_.id + " has no " + axis_name(c) + " binding");
    return *f;
  }

  bool aligned_on(Channel c) const { return spec_.alignment && spec_.alignment->axis == c; }

  double range_start(Channel c) const { return c == Channel::X ? kLeft : kTop; }
  double range_end(Channel c) const { return c == Channel::X ? right_ : kBottom; }

  /// Bands run left-to-right / top-to-bottom; numbers run left-to-right / bottom-to-top.
  Axis axis_for(Channel c, const FieldRef& ref) const {
    const Field& f = catalog_.field(ref);
    if (aligned_on(c) && spec_.alignment->numeric_domain) {
      auto [lo, hi] = *spec_.alignment->numeric_domain;
      return numeric_axis(c, f.name, lo, hi);
    }
    if (f.numeric()) {
      auto [lo, hi] = numeric_range(column(ref));
      return numeric_axis(c, f.name, lo, hi);
    }
    std::vector<std::string> cats = aligned_on(c) ? spec_.alignment->categories : f.values;
    return Axis::bands(c, f.name, std::move(cats), range_start(c), range_end(c));
  }

  Axis numeric_axis(Channel c, std::string label, double lo, double hi) const {
    if (c == Channel::X) return Axis::linear(c, std::move(label), lo, hi, kLeft, right_);
    return Axis::linear(c, std::move(label), lo, hi, kBottom, kTop);
  }

  void draw_axis(const Axis& a) {
    const bool x = a.channel == Channel::X;
    const std::string name = axis_name(a.channel);
    w_.open_group({{"class", "axis"}, {"data-axis", name}});
    if (x) {
      w_.line(kLeft, kBottom, right_, kBottom, {{"class", "domain"}, {"stroke", "#333333"}});
    } else {
      w_.line(kLeft, kTop, kLeft, kBottom, {{"class", "domain"}, {"stroke", "#333333"}});
    }
    if (a.categorical) {
      double fs = std::clamp(a.band() * 0.9, 1.0, 9.0);
      for (std::size_t i = 0; i < a.categories.size(); ++i) {
        double p = *a.at_index(i);
        if (x) {
          w_.text(p, kBottom + 6, a.categories[i],
                  {{"class", "tick"},
                   {"data-axis", name},
                   {"data-category", a.categories[i]},
                   {"font-size", text::fixed(fs)},
                   {"text-anchor", "end"},
                   {"transform", "rotate(-45 " + text::fixed(p) + " " + text::fixed(kBottom + 6) + ")"}});
        } else {
          w_.text(kLeft - 4, p + fs / 3, a.categories[i],
                  {{"class", "tick"},
                   {"data-axis", name},
                   {"data-category", a.categories[i]},
                   {"font-size", text::fixed(fs)},
                   {"text-anchor", "end"}});
        }
      }
    } else {
      for (int i = 0; i <= 4; ++i) {
        double v = a.lo + (a.hi - a.lo) * double(i) / 4.0;
        double p = *a.at_value(v);
        auto label = text::shortest(std::round(v * 100) / 100);
        if (x) {
          w_.text(p, kBottom + 14, label,
                  {{"class", "tick"}, {"data-axis", name}, {"data-value", label}, {"font-size", "9"},
                   {"text-anchor", "middle"}});
        } else {
          w_.text(kLeft - 4, p + 3, label,
                  {{"class", "tick"}, {"data-axis", name}, {"data-value", label}, {"font-size", "9"},
                   {"text-anchor", "end"}});
        }
      }
    }
    if (x) {
      w_.text((kLeft + right_) / 2, kCellHeight - 6, a.label,
              {{"class", "axis-label"}, {"data-axis", name}, {"font-size", "10"}, {"text-anchor", "middle"}});
    } else {
      w_.text(12, (kTop + kBottom) / 2, a.label,
              {{"class", "axis-label"},
               {"data-axis", name},
               {"font-size", "10"},
               {"text-anchor", "middle"},
               {"transform", "rotate(-90 12 " + text::fixed((kTop + kBottom) / 2) + ")"}});
    }
    w_.close_group();
  }

  std::string color_at(std::size_t record) const {
    if (!color_) return std::string(kDefaultMark);
    return color_->of(column(*spec_.bound(Channel::Color))[record]);
  }

  std::string category_at(std::size_t record) const {
    if (!color_ || color_->numeric) return {};
    return std::string(text::trim(column(*spec_.bound(Channel::Color))[record]));
  }

  void legend() {
    if (!color_) return;
    const double x = kRight - kLegendWidth + 10;
    w_.open_group({{"class", "legend"}});
    w_.text(x, kTop, spec_.bound(Channel::Color)->name, {{"class", "legend-title"}, {"font-size", "9"}});
    if (color_->numeric) {
      for (std::size_t i = 0; i < kSequentialRamp.size(); ++i) {
        double y = kTop + 8 + double(i) * 12;
        double v = color_->lo + (color_->hi - color_->lo) * double(i) / double(kSequentialRamp.size());
        w_.rect(x, y, 10, 10, {{"class", "ramp-step"}, {"fill", std::string(kSequentialRamp[i])}});
        w_.text(x + 14, y + 8, text::shortest(std::round(v * 100) / 100), {{"font-size", "8"}});
      }
    } else {
      std::size_t i = 0;
      const double step = std::min(12.0, (kBottom - kTop - 8) / double(std::max<std::size_t>(color_->palette.size(), 1)));
      for (const auto& [cat, fill] : color_->palette) {
        double y = kTop + 8 + double(i++) * step;
        w_.rect(x, y, 8, std::max(1.0, step - 2), {{"class", "legend-item"}, {"data-category", cat}, {"fill", fill}});
        w_.text(x + 12, y + std::min(8.0, step), cat, {{"font-size", text::fixed(std::min(8.0, step))}});
      }
    }
    w_.close_group();
  }

  // --- renderers ---------------------------------------------------------

  void tree() {
    const auto& t = std::get<Tree>(ds_.payload);
    auto key = need(Channel::Y);
    std::vector<std::string> leaves;
    for (const auto& l : t.leaf_labels()) leaves.emplace_back(text::trim(l));
    auto cats = spec_.alignment && spec_.alignment->axis == Channel::Y && !spec_.alignment->categories.empty()
                    ? spec_.alignment->categories
                    : leaves;
    Axis y = Axis::bands(Channel::Y, catalog_.field(key).name, cats, kTop, kBottom);

    // Tip labels sit right of the leaves, so the tree itself uses the left part.
    const double x0 = 16, x1 = right_ - 64;
    const std::size_t n = t.nodes.size();
    std::vector<double> ny(n, 0), nx(n, 0);
    if (t.has_branch_lengths()) {
      std::vector<double> dist(n, 0);
      double maxd = 0;
      for (std::size_t i = 1; i < n; ++i) {
        dist[i] = dist[*t.nodes[i].parent] + std::max(0.0, t.nodes[i].branch_length.value_or(0.0));
        maxd = std::max(maxd, dist[i]);
      }
      for (std::size_t i = 0; i < n; ++i) nx[i] = x0 + (maxd > 0 ? dist[i] / maxd : 0.0) * (x1 - x0);
    } else {
      std::vector<int> height(n, 0);
      for (std::size_t i = n; i-- > 0;) {
        for (auto c : t.nodes[i].children) height[i] = std::max(height[i], height[c] + 1);
      }
      int h = std::max(height[0], 1);
      for (std::size_t i = 0; i < n; ++i) nx[i] = x0 + double(h - height[i]) / double(h) * (x1 - x0);
    }
    for (std::size_t i = n; i-- > 0;) {
      const auto& node = t.nodes[i];
      if (node.children.empty()) {
        ny[i] = y.pos(node.name).value_or(kBottom);
      } else {
        double sum = 0;
        for (auto c : node.children) sum += ny[c];
        ny[i] = sum / double(node.children.size());
      }
    }

    w_.open_group({{"class", "branches"}, {"stroke", "#333333"}, {"fill", "none"}});
    for (std::size_t i = 0; i < n; ++i) {
      const auto& node = t.nodes[i];
      if (node.parent) w_.line(nx[*node.parent], ny[i], nx[i], ny[i], {{"class", "branch"}});
      if (!node.children.empty()) {
        double lo = ny[i], hi = ny[i];
        for (auto c : node.children) {
          lo = std::min(lo, ny[c]);
          hi = std::max(hi, ny[c]);
        }
        w_.line(nx[i], lo, nx[i], hi, {{"class", "branch"}});
      }
    }
    w_.close_group();

    std::map<std::string, std::size_t> record_of;
    const auto& ids = column(key);
    for (std::size_t r = 0; r < ids.size(); ++r) record_of.emplace(std::string(text::trim(ids[r])), r);
    double fs = std::clamp(y.band() * 0.9, 1.0, 9.0);
    w_.open_group({{"class", "axis"}, {"data-axis", "y"}});
    for (std::size_t i = 0; i < y.categories.size(); ++i) {
      double p = *y.at_index(i);
      w_.text(x1 + 8, p + fs / 3, y.categories[i],
              {{"class", "tick leaf-label"}, {"data-axis", "y"}, {"data-category", y.categories[i]},
               {"font-size", text::fixed(fs)}});
    }
    w_.close_group();
    if (color_) {
      w_.open_group({{"class", "leaf-marks"}});
      for (auto leaf : t.leaves()) {
        auto it = record_of.find(std::string(text::trim(t.nodes[leaf].name)));
        if (it == record_of.end()) continue;
        w_.circle(nx[leaf] + 4, ny[leaf], std::clamp(y.band() * 0.35, 1.0, 3.5),
                  {{"class", "leaf-mark"}, {"data-category", category_at(it->second)}, {"fill", color_at(it->second)}});
      }
      w_.close_group();
    }
  }

  void scatter() {
    auto fx = need(Channel::X), fy = need(Channel::Y);
    Axis x = axis_for(Channel::X, fx), y = axis_for(Channel::Y, fy);
    draw_axis(x);
    draw_axis(y);
    const auto& cx = column(fx);
    const auto& cy = column(fy);
    std::optional<std::pair<double, double>> size_range;
    const std::vector<std::string>* cs = nullptr;
    if (auto s = spec_.bound(Channel::Size)) {
      cs = &column(*s);
      size_range = numeric_range(*cs);
    }
    w_.open_group({{"class", "marks"}});
    for (std::size_t r = 0; r < ds_.records.record_count; ++r) {
      auto px = x.pos(cx[r]), py = y.pos(cy[r]);
      if (!px || !py) continue;
      double radius = 3;
      if (cs) {
        auto v = text::parse_number((*cs)[r]);
        if (!v) continue;
        auto [lo, hi] = *size_range;
        radius = 2 + (hi > lo ? (*v - lo) / (hi - lo) : 0.5) * 6;
      }
      w_.circle(*px, *py, radius,
                {{"class", "point"}, {"data-category", category_at(r)}, {"fill", color_at(r)}, {"fill-opacity", "0.8"}});
    }
    w_.close_group();
  }

  void bar() {
    // The category axis is whichever positional channel holds the non-numeric field.
    Channel cat_ch = Channel::X;
    for (auto c : {Channel::X, Channel::Y}) {
      if (auto f = spec_.bound(c); f && !catalog_.field(*f).numeric()) cat_ch = c;
    }
    Channel val_ch = cat_ch == Channel::X ? Channel::Y : Channel::X;
    auto fc = need(cat_ch);
    auto fv = spec_.bound(val_ch);
    Axis cat = axis_for(cat_ch, fc);
    std::vector<double> agg(cat.categories.size(), 0.0);
    const auto& cc = column(fc);
    for (std::size_t r = 0; r < ds_.records.record_count; ++r) {
      if (text::is_missing(cc[r])) continue;
      auto it = cat.index.find(std::string(text::trim(cc[r])));
      if (it == cat.index.end()) continue;
      if (fv) {
        if (auto v = text::parse_number(column(*fv)[r])) agg[it->second] += *v;
      } else {
        agg[it->second] += 1;
      }
    }
    double top = 0;
    for (double v : agg) top = std::max(top, v);
    if (top <= 0) top = 1;
    Axis val = numeric_axis(val_ch, fv ? fv->name : std::string("count"), 0, top);
    draw_axis(cat);
    draw_axis(val);
    const bool same_color = color_ && spec_.bound(Channel::Color) == fc;
    w_.open_group({{"class", "marks"}});
    for (std::size_t i = 0; i < cat.categories.size(); ++i) {
      double center = *cat.at_index(i), thick = cat.band() * 0.8;
      double base = *val.at_value(0), end = *val.at_value(agg[i]);
      std::string fill = same_color ? color_->of(cat.categories[i]) : std::string(kDefaultMark);
      std::string value = text::shortest(agg[i]);
      if (cat_ch == Channel::X) {
        w_.rect(center - thick / 2, end, thick, base - end,
                {{"class", "bar"}, {"data-category", cat.categories[i]}, {"data-value", value}, {"fill", fill}});
      } else {
        w_.rect(base, center - thick / 2, end - base, thick,
                {{"class", "bar"}, {"data-category", cat.categories[i]}, {"data-value", value}, {"fill", fill}});
      }
    }
    w_.close_group();
  }

  void histogram() {
    Channel ch = spec_.bound(Channel::X) ? Channel::X : Channel::Y;
    auto f = need(ch);
    const auto& col = column(f);
    auto [lo, hi] = aligned_on(ch) && spec_.alignment->numeric_domain ? *spec_.alignment->numeric_domain
                                                                      : numeric_range(col);
    if (!(hi > lo)) hi = lo + 1;
    std::vector<std::size_t> counts(kHistogramBins, 0);
    for (const auto& raw : col) {
      auto v = text::parse_number(raw);
      if (!v || *v < lo || *v > hi) continue;
      auto b = std::min<std::size_t>(kHistogramBins - 1, std::size_t((*v - lo) / (hi - lo) * double(kHistogramBins)));
      ++counts[b];
    }
    double top = double(*std::max_element(counts.begin(), counts.end()));
    Axis val = numeric_axis(ch, f.name, lo, hi);
    Axis cnt = numeric_axis(ch == Channel::X ? Channel::Y : Channel::X, "count", 0, std::max(top, 1.0));
    draw_axis(val);
    draw_axis(cnt);
    w_.open_group({{"class", "marks"}});
    for (std::size_t b = 0; b < kHistogramBins; ++b) {
      double a0 = *val.at_value(lo + (hi - lo) * double(b) / double(kHistogramBins));
      double a1 = *val.at_value(lo + (hi - lo) * double(b + 1) / double(kHistogramBins));
      double base = *cnt.at_value(0), end = *cnt.at_value(double(counts[b]));
      bool vertical = ch == Channel::X;
      w_.rect(vertical ? a0 : base, vertical ? end : a1, vertical ? a1 - a0 : end - base,
              vertical ? base - end : a0 - a1,
              {{"class", "bin"}, {"data-count", std::to_string(counts[b])}, {"fill", std::string(kDefaultMark)},
               {"stroke", "#ffffff"}});
    }
    w_.close_group();
  }

  /// Numeric fields become 10 equal-width bins so every heatmap axis is banded.
  Axis banded(Channel c, const FieldRef& ref, std::vector<std::string>& labels_by_record) const {
    const Field& f = catalog_.field(ref);
    const auto& col = column(ref);
    labels_by_record.assign(col.size(), std::string());
    if (!f.numeric()) {
      Axis a = axis_for(c, ref);
      for (std::size_t r = 0; r < col.size(); ++r) {
        if (!text::is_missing(col[r])) labels_by_record[r] = std::string(text::trim(col[r]));
      }
      return a;
    }
    auto [lo, hi] = aligned_on(c) && spec_.alignment->numeric_domain ? *spec_.alignment->numeric_domain
                                                                     : numeric_range(col);
    if (!(hi > lo)) hi = lo + 1;
    std::vector<std::string> cats;
    for (std::size_t b = 0; b < kHistogramBins; ++b) {
      cats.push_back(text::shortest(std::round((lo + (hi - lo) * double(b) / double(kHistogramBins)) * 100) / 100));
    }
    for (std::size_t r = 0; r < col.size(); ++r) {
      if (auto v = text::parse_number(col[r])) {
        auto b = std::min<std::size_t>(kHistogramBins - 1, std::size_t((*v - lo) / (hi - lo) * double(kHistogramBins)));
        labels_by_record[r] = cats[b];
      }
    }
    return Axis::bands(c, f.name, std::move(cats), range_start(c), range_end(c));
  }

  void heatmap() {
    auto fx = need(Channel::X), fy = need(Channel::Y);
    std::vector<std::string> lx, ly;
    Axis x = banded(Channel::X, fx, lx), y = banded(Channel::Y, fy, ly);
    draw_axis(x);
    draw_axis(y);
    auto fc = spec_.bound(Channel::Color);
    const bool mean_of = fc && catalog_.field(*fc).numeric();
    std::map<std::pair<std::size_t, std::size_t>, std::pair<double, std::size_t>> cells;
    for (std::size_t r = 0; r < ds_.records.record_count; ++r) {
      auto ix = x.index.find(lx[r]);
      auto iy = y.index.find(ly[r]);
      if (ix == x.index.end() || iy == y.index.end()) continue;
      auto& cell = cells[{ix->second, iy->second}];
      if (mean_of) {
        auto v = text::parse_number(column(*fc)[r]);
        if (!v) continue;
        cell.first += *v;
      } else {
        cell.first += 1;
      }
      ++cell.second;
    }
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (auto& [k, c] : cells) {
      if (c.second == 0) continue;
      if (mean_of) c.first /= double(c.second);
      lo = std::min(lo, c.first);
      hi = std::max(hi, c.first);
    }
    w_.open_group({{"class", "marks"}});
    for (const auto& [k, c] : cells) {
      if (c.second == 0) continue;
      double px = *x.at_index(k.first), py = *y.at_index(k.second);
      w_.rect(px - x.band() / 2, py - y.band() / 2, x.band(), y.band(),
              {{"class", "cell"},
               {"data-x", x.categories[k.first]},
               {"data-y", y.categories[k.second]},
               {"data-value", text::shortest(std::round(c.first * 1000) / 1000)},
               {"fill", std::string(kSequentialRamp[ramp_step(c.first, lo, hi)])}});
    }
    w_.close_group();
  }

  void line() {
    auto fx = need(Channel::X), fy = need(Channel::Y);
    Axis x = axis_for(Channel::X, fx), y = axis_for(Channel::Y, fy);
    draw_axis(x);
    draw_axis(y);
    // Mean of the dependent value per independent position, one series per color category.
    Channel indep = catalog_.field(fx).numeric() && !catalog_.field(fy).numeric() ? Channel::Y : Channel::X;
    const Axis& ia = indep == Channel::X ? x : y;
    const Axis& da = indep == Channel::X ? y : x;
    const auto& ci = column(indep == Channel::X ? fx : fy);
    const auto& cd = column(indep == Channel::X ? fy : fx);
    std::map<std::string, std::map<double, std::pair<double, std::size_t>>> series;
    for (std::size_t r = 0; r < ds_.records.record_count; ++r) {
      auto pi = ia.pos(ci[r]), pd = da.pos(cd[r]);
      if (!pi || !pd) continue;
      auto& acc = series[category_at(r)][*pi];
      acc.first += *pd;
      ++acc.second;
    }
    w_.open_group({{"class", "marks"}, {"fill", "none"}});
    for (const auto& [cat, pts] : series) {
      std::string d;
      std::string stroke = color_ && !color_->numeric ? color_->of(cat) : std::string(kDefaultMark);
      for (const auto& [pi, acc] : pts) {
        double pd = acc.first / double(acc.second);
        double px = indep == Channel::X ? pi : pd, py = indep == Channel::X ? pd : pi;
        d += (d.empty() ? "M" : " L") + text::fixed(px) + " " + text::fixed(py);
      }
      w_.path(d, {{"class", "line"}, {"data-category", cat}, {"stroke", stroke}, {"stroke-width", "1.5"}});
      for (const auto& [pi, acc] : pts) {
        double pd = acc.first / double(acc.second);
        double px = indep == Channel::X ? pi : pd, py = indep == Channel::X ? pd : pi;
        w_.circle(px, py, 2, {{"class", "point"}, {"data-category", cat}, {"fill", stroke}});
      }
    }
    w_.close_group();
  }

  void table() {
    auto fy = need(Channel::Y);
    Axis y = axis_for(Channel::Y, fy);
    if (!y.categorical) {
      // Numeric row keys keep record order.
      std::vector<std::string> order;
      std::set<std::string> seen;
      for (const auto& raw : column(fy)) {
        std::string v(text::trim(raw));
        if (!text::is_missing(v) && seen.insert(v).second) order.push_back(v);
      }
      y = Axis::bands(Channel::Y, fy.name, std::move(order), kTop, kBottom);
    }
    std::vector<std::string> cols{fy.name};
    for (auto c : {Channel::X, Channel::Color, Channel::Shape, Channel::Size}) {
      if (auto f = spec_.bound(c); f && std::find(cols.begin(), cols.end(), f->name) == cols.end()) {
        cols.push_back(f->name);
      }
    }
    for (const auto& name : ds_.records.columns) {
      if (cols.size() >= 4) break;
      if (std::find(cols.begin(), cols.end(), name) == cols.end()) cols.push_back(name);
    }
    const auto& key = column(fy);
    std::map<std::string, std::size_t> first_row;
    for (std::size_t r = 0; r < key.size(); ++r) first_row.emplace(std::string(text::trim(key[r])), r);
    const double x0 = 16, colw = (right_ - x0) / double(cols.size());
    double fs = std::clamp(y.band() * 0.9, 1.0, 9.0);
    w_.open_group({{"class", "table"}});
    for (std::size_t c = 0; c < cols.size(); ++c) {
      w_.text(x0 + double(c) * colw, kTop - 4, cols[c],
              {{"class", "table-header"}, {"font-size", "9"}, {"font-weight", "bold"}});
    }
    for (std::size_t i = 0; i < y.categories.size(); ++i) {
      double p = *y.at_index(i) + fs / 3;
      w_.text(x0, p, y.categories[i],
              {{"class", "tick table-cell"}, {"data-axis", "y"}, {"data-category", y.categories[i]},
               {"font-size", text::fixed(fs)}});
      auto it = first_row.find(y.categories[i]);
      if (it == first_row.end()) continue;
      for (std::size_t c = 1; c < cols.size(); ++c) {
        w_.text(x0 + double(c) * colw, p, std::string(text::trim(ds_.records.column(cols[c])[it->second])),
                {{"class", "table-cell"}, {"font-size", text::fixed(fs)}});
      }
    }
    w_.close_group();
  }

  void map() {
    const auto& fs = std::get<FeatureSet>(ds_.payload);
    auto region = need(Channel::X);
    const auto& names = column(region);
    double minx = std::numeric_limits<double>::infinity(), maxx = -minx, miny = minx, maxy = -minx;
    for (const auto& f : fs.features) {
      for (const auto& poly : f.polygons) {
        for (const auto& ring : poly) {
          for (const auto& [px, py] : ring) {
            minx = std::min(minx, px);
            maxx = std::max(maxx, px);
            miny = std::min(miny, py);
            maxy = std::max(maxy, py);
          }
        }
      }
    }
    if (!(maxx > minx)) maxx = minx + 1;
    if (!(maxy > miny)) maxy = miny + 1;
    // Equirectangular: plain lon/lat, y flipped, aspect preserved.
    const double x0 = 16, x1 = right_, y0 = kTop, y1 = kBottom + 30;
    double s = std::min((x1 - x0) / (maxx - minx), (y1 - y0) / (maxy - miny));
    double ox = x0 + ((x1 - x0) - s * (maxx - minx)) / 2, oy = y0 + ((y1 - y0) - s * (maxy - miny)) / 2;
    // Category fill when color is bound; otherwise a numeric choropleth from
    // size. With both, size is drawn as a circle at each region's centroid.
    auto size = spec_.bound(Channel::Size);
    std::pair<double, double> size_range{0, 1};
    if (size) size_range = numeric_range(column(*size));
    auto fill_of = [&](std::size_t r) -> std::string {
      if (color_) return color_at(r);
      if (size) {
        auto v = text::parse_number(column(*size)[r]);
        return v ? std::string(kSequentialRamp[ramp_step(*v, size_range.first, size_range.second)])
                 : std::string(kNoData);
      }
      return std::string(kNoData);
    };
    w_.open_group({{"class", "regions"}, {"stroke", "#555555"}, {"stroke-width", "0.5"}});
    for (std::size_t r = 0; r < fs.features.size(); ++r) {
      std::string d;
      for (const auto& poly : fs.features[r].polygons) {
        for (const auto& ring : poly) {
          for (std::size_t k = 0; k < ring.size(); ++k) {
            d += (k == 0 ? (d.empty() ? "M" : " M") : " L") + text::fixed(ox + (ring[k].first - minx) * s) + " " +
                 text::fixed(oy + (maxy - ring[k].second) * s);
          }
          d += " Z";
        }
      }
      w_.path(d, {{"class", "region"},
                  {"data-category", std::string(text::trim(names[r]))},
                  {"fill", fill_of(r)},
                  {"fill-rule", "evenodd"}});
    }
    w_.close_group();
    if (size && color_) {
      w_.open_group({{"class", "bubbles"}, {"fill", "#333333"}, {"fill-opacity", "0.55"}});
      for (std::size_t r = 0; r < fs.features.size(); ++r) {
        auto v = text::parse_number(column(*size)[r]);
        if (!v) continue;
        // Centroid of the outer ring vertices of the largest polygon.
        const Ring* outer = nullptr;
        for (const auto& poly : fs.features[r].polygons) {
          if (!poly.empty() && (!outer || poly.front().size() > outer->size())) outer = &poly.front();
        }
        if (!outer || outer->empty()) continue;
        double sx = 0, sy = 0;
        for (const auto& [px, py] : *outer) {
          sx += px;
          sy += py;
        }
        double mx = sx / double(outer->size()), my = sy / double(outer->size());
        auto [lo, hi] = size_range;
        double radius = 2 + (hi > lo ? (*v - lo) / (hi - lo) : 0.5) * 8;
        w_.circle(ox + (mx - minx) * s, oy + (maxy - my) * s, radius,
                  {{"class", "bubble"}, {"data-value", text::shortest(*v)}});
      }
      w_.close_group();
    }
  }

  void genomic() {
    const auto& seqs = std::get<std::vector<Sequence>>(ds_.payload);
    auto key = need(Channel::Y);
    Axis y = axis_for(Channel::Y, key);
    std::map<std::string, const Sequence*> by_id;
    std::size_t len = 0;
    for (const auto& s : seqs) {
      by_id.emplace(std::string(text::trim(s.id)), &s);
      len = std::max(len, s.residues.size());
    }
    auto base = [](const Sequence& s, std::size_t i) { return i < s.residues.size() ? s.residues[i] : '-'; };
    constexpr std::size_t kMaxSites = 40;
    std::vector<std::size_t> sites;
    for (std::size_t i = 0; i < len && sites.size() < kMaxSites; ++i) {
      std::set<char> seen;
      for (const auto& s : seqs) seen.insert(char(std::toupper(static_cast<unsigned char>(base(s, i)))));
      if (seen.size() > 1) sites.push_back(i);
    }
    if (sites.empty()) {
      for (std::size_t i = 0; i < std::min(len, kMaxSites); ++i) sites.push_back(i);
    }
    draw_axis(y);
    const double colw = sites.empty() ? 0 : (right_ - kLeft) / double(sites.size());
    w_.open_group({{"class", "marks"}});
    for (std::size_t i = 0; i < y.categories.size(); ++i) {
      auto it = by_id.find(y.categories[i]);
      if (it == by_id.end()) continue;
      double py = *y.at_index(i) - y.band() / 2;
      for (std::size_t k = 0; k < sites.size(); ++k) {
        char b = char(std::toupper(static_cast<unsigned char>(base(*it->second, sites[k]))));
        std::string_view fill = b == 'A' ? "#2ca02c" : b == 'C' ? "#1f77b4" : b == 'G' ? "#ff7f0e" : b == 'T' ? "#d62728" : "#cccccc";
        w_.rect(kLeft + double(k) * colw, py, colw, y.band(),
                {{"class", "base"}, {"data-base", std::string(1, b)}, {"data-site", std::to_string(sites[k] + 1)},
                 {"fill", std::string(fill)}});
      }
    }
    w_.close_group();
  }

  void image() {
    const auto& ref = std::get<ImageRef>(ds_.payload);
    auto bytes = text::read_file(ref.path);
    auto ext = ref.path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return char(std::tolower(c)); });
    std::string mime = ext == ".png"                     ? "image/png"
                       : ext == ".jpg" || ext == ".jpeg" ? "image/jpeg"
                       : ext == ".gif"                   ? "image/gif"
                       : ext == ".svg"                   ? "image/svg+xml"
                                                         : "application/octet-stream";
    w_.raw("<image class=\"embedded-image\" x=\"" + text::fixed(kLeft) + "\" y=\"" + text::fixed(kTop) +
           "\" width=\"" + text::fixed(right_ - kLeft) + "\" height=\"" + text::fixed(kBottom - kTop) +
           "\" preserveAspectRatio=\"none\" href=\"data:" + mime + ";base64," + text::base64(bytes) + "\"/>\n");
    if (auto lanes = spec_.bound(Channel::X)) {
      std::vector<std::string> order;
      for (const auto& v : column(*lanes)) order.emplace_back(text::trim(v));
      draw_axis(Axis::bands(Channel::X, lanes->name, order, kLeft, right_));
    }
  }

  void node_link() {
    const auto& el = std::get<EdgeList>(ds_.payload);
    auto key = need(Channel::X);
    const auto& ids = column(key);
    std::map<std::string, std::size_t> at;
    for (std::size_t r = 0; r < ids.size(); ++r) at.emplace(std::string(text::trim(ids[r])), r);
    const double cx = (16 + right_) / 2, cy = (kTop + kBottom) / 2;
    const double radius = std::min(right_ - 16, kBottom - kTop) / 2 - 10;
    std::vector<std::pair<double, double>> pos(ids.size());
    for (std::size_t r = 0; r < ids.size(); ++r) {
      double a = 2 * std::numbers::pi * double(r) / double(std::max<std::size_t>(ids.size(), 1)) - std::numbers::pi / 2;
      pos[r] = {cx + radius * std::cos(a), cy + radius * std::sin(a)};
    }
    w_.open_group({{"class", "links"}, {"stroke", "#999999"}});
    for (const auto& [a, b] : el.edges) {
      auto ia = at.find(std::string(text::trim(a))), ib = at.find(std::string(text::trim(b)));
      if (ia == at.end() || ib == at.end()) continue;
      w_.line(pos[ia->second].first, pos[ia->second].second, pos[ib->second].first, pos[ib->second].second,
              {{"class", "link"}});
    }
    w_.close_group();
    w_.open_group({{"class", "marks"}});
    for (std::size_t r = 0; r < ids.size(); ++r) {
      w_.circle(pos[r].first, pos[r].second, 4,
                {{"class", "node"}, {"data-id", std::string(text::trim(ids[r]))}, {"data-category", category_at(r)},
                 {"fill", color_at(r)}});
    }
    w_.close_group();
  }

  const ChartSpec& spec_;
  const Catalog& catalog_;
  const Dataset& ds_;
  std::optional<ColorScale> color_;
  double right_ = kRight;
  svg::Writer w_;
};

}  // namespace render_detail

/// One chart as an SVG group in local coordinates of a kCellWidth x
/// kCellHeight box.
inline std::string render_chart(const ChartSpec& spec, const Catalog& catalog) {
  if (!all_required_bound(spec)) {
    throw Error(ErrorCode::InvalidArgument, spec.id + " is not complete");
  }
  return render_detail::ChartRenderer(spec, catalog).render();
}

}  // namespace gevitrec
