#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gevitrec/dataset.hpp"
#include "gevitrec/error.hpp"
#include "gevitrec/fields.hpp"
#include "gevitrec/ranking.hpp"

namespace gevitrec {

enum class Channel { X, Y, Color, Shape, Size };

constexpr std::string_view to_string(Channel c) {
  switch (c) {
    case Channel::X: return "x";
    case Channel::Y: return "y";
    case Channel::Color: return "color";
    case Channel::Shape: return "shape";
    case Channel::Size: return "size";
  }
  return "x";
}

inline Channel parse_channel(std::string_view s) {
  for (auto c : {Channel::X, Channel::Y, Channel::Color, Channel::Shape, Channel::Size}) {
    if (s == to_string(c)) return c;
  }
  throw Error(ErrorCode::ParseError, "unknown channel '" + std::string(s) + "'");
}

constexpr bool is_positional(Channel c) { return c == Channel::X || c == Channel::Y; }

enum class SlotConstraint { Numeric, NonNumeric, NonNumericLowCard, NonNumericHighCard, Any, Key };

constexpr std::string_view to_string(SlotConstraint c) {
  switch (c) {
    case SlotConstraint::Numeric: return "numeric";
    case SlotConstraint::NonNumeric: return "non-numeric";
    case SlotConstraint::NonNumericLowCard: return "non-numeric_low_card";
    case SlotConstraint::NonNumericHighCard: return "non-numeric_high_card";
    case SlotConstraint::Any: return "any";
    case SlotConstraint::Key: return "key";
  }
  return "any";
}

inline SlotConstraint parse_constraint(std::string_view s) {
  for (auto c : {SlotConstraint::Numeric, SlotConstraint::NonNumeric, SlotConstraint::NonNumericLowCard,
                 SlotConstraint::NonNumericHighCard, SlotConstraint::Any, SlotConstraint::Key}) {
    if (s == to_string(c)) return c;
  }
  throw Error(ErrorCode::ParseError, "unknown slot constraint '" + std::string(s) + "'");
}

struct SlotLimits {
  std::size_t color_card_limit = 12;    // color/shape need fewer categories than this
  std::size_t highcard_threshold = 12;  // positional non-numeric needs at least this many
};

struct EncodingSlot {
  Channel channel = Channel::X;
  SlotConstraint constraint = SlotConstraint::Any;
  bool required = false;
  bool reuse = false;  // may take a field already bound elsewhere in the chart
  std::optional<FieldRef> field;
};

struct ChartTemplate {
  std::string chart_type;
  DataType dtype = DataType::Tabular;
  std::vector<EncodingSlot> slots;
};

/// Parses the template file: [{chart_type, dtype, slots:[{channel, constraint, required, reuse?}]}].
inline std::vector<ChartTemplate> templates_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "templates: expected a JSON array");
  std::vector<ChartTemplate> out;
  std::set<std::pair<std::string, DataType>> seen;
  for (const auto& t : j) {
    ChartTemplate tpl;
    tpl.chart_type = t.at("chart_type").get<std::string>();
    tpl.dtype = parse_data_type(t.at("dtype").get<std::string>());
    for (const auto& s : t.at("slots")) {
      EncodingSlot slot;
      slot.channel = parse_channel(s.at("channel").get<std::string>());
      slot.constraint = parse_constraint(s.value("constraint", "any"));
      slot.required = s.value("required", false);
      slot.reuse = s.value("reuse", false);
      tpl.slots.push_back(slot);
    }
    if (std::none_of(tpl.slots.begin(), tpl.slots.end(), [](const EncodingSlot& s) { return s.required; })) {
      throw Error(ErrorCode::ParseError, "templates: '" + tpl.chart_type + "' has no required slot");
    }
    if (!seen.emplace(tpl.chart_type, tpl.dtype).second) {
      throw Error(ErrorCode::ParseError, "templates: '" + tpl.chart_type + "' defined twice for " +
                                             std::string(to_string(tpl.dtype)));
    }
    out.push_back(std::move(tpl));
  }
  return out;
}

inline void validate_templates(std::span<const ChartTemplate> templates, const RelevanceTable& rel,
                               const TypeEncodingMap& map) {
  for (const auto& t : templates) {
    if (!rel.contains(t.chart_type)) {
      throw Error(ErrorCode::ConfigError, "template '" + t.chart_type + "' has no relevance score");
    }
  }
  for (const auto& [dtype, charts] : map.charts) {
    for (const auto& c : charts) {
      bool found = std::any_of(templates.begin(), templates.end(), [&](const ChartTemplate& t) {
        return t.chart_type == c && t.dtype == dtype;
      });
      if (!found) {
        throw Error(ErrorCode::ConfigError, "no template for '" + c + "' on " + std::string(to_string(dtype)));
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Slot constraints

inline bool positional_ok(const Field& f, const SlotLimits& limits) {
  if (f.numeric()) return true;
  return f.cardinality >= limits.highcard_threshold || (f.cardinality > 0 && f.cardinality == f.row_count);
}

inline bool satisfies(SlotConstraint c, Channel channel, const Field& f, const SlotLimits& limits) {
  switch (c) {
    case SlotConstraint::Numeric: return f.numeric();
    case SlotConstraint::NonNumeric: return !f.numeric();
    case SlotConstraint::NonNumericLowCard: return !f.numeric() && f.cardinality < limits.color_card_limit;
    case SlotConstraint::NonNumericHighCard:
      return !f.numeric() && (f.cardinality >= limits.highcard_threshold || f.cardinality == f.row_count);
    case SlotConstraint::Key: return f.is_key;
    case SlotConstraint::Any: return is_positional(channel) ? positional_ok(f, limits) : true;
  }
  return false;
}

/// Channel rules that hold regardless of template: color/shape take
/// non-numeric fields with fewer than color_card_limit categories, size takes
/// numeric fields. Positional rules are the default for "any" slots.
inline bool slot_accepts(const EncodingSlot& slot, const Field& f, const SlotLimits& limits) {
  switch (slot.channel) {
    case Channel::Color:
    case Channel::Shape:
      if (f.numeric() || f.cardinality >= limits.color_card_limit) return false;
      break;
    case Channel::Size:
      if (!f.numeric()) return false;
      break;
    case Channel::X:
    case Channel::Y:
      break;
  }
  return satisfies(slot.constraint, slot.channel, f, limits);
}

/// Returns the slot bound to `field`, or nullopt when the field violates the
/// slot's constraints (the caller should try another slot).
inline std::optional<EncodingSlot> assign_field_to_slot(const EncodingSlot& slot, const Field& field,
                                                        const SlotLimits& limits = {}) {
  if (slot.field) throw Error(ErrorCode::InvalidArgument, "slot is already assigned");
  if (!slot_accepts(slot, field, limits)) return std::nullopt;
  EncodingSlot out = slot;
  out.field = field.ref();
  return out;
}

// ---------------------------------------------------------------------------
// Field priority

struct FieldWithDegree {
  const Field* field = nullptr;
  std::size_t degree = 0;
};

struct FieldPriority {
  std::vector<const Field*> order;
  std::vector<std::string> unknown_user_fields;
};

/// User fields first (in the order given), then descending degree, ties by
/// descending cardinality and ascending name.
inline FieldPriority prioritize_fields(std::span<const FieldWithDegree> fields,
                                       std::span<const std::string> user_fields = {}) {
  std::vector<FieldWithDegree> rest(fields.begin(), fields.end());
  std::stable_sort(rest.begin(), rest.end(), [](const FieldWithDegree& a, const FieldWithDegree& b) {
    if (a.degree != b.degree) return a.degree > b.degree;
    if (a.field->cardinality != b.field->cardinality) return a.field->cardinality > b.field->cardinality;
    return std::tie(a.field->name, a.field->source_id) < std::tie(b.field->name, b.field->source_id);
  });
  FieldPriority out;
  std::set<FieldRef> taken;
  for (const auto& name : user_fields) {
    bool found = false;
    for (const auto& f : rest) {
      if (f.field->name == name) {
        found = true;
        if (taken.insert(f.field->ref()).second) out.order.push_back(f.field);
      }
    }
    if (!found) out.unknown_user_fields.push_back(name);
  }
  for (const auto& f : rest) {
    if (taken.insert(f.field->ref()).second) out.order.push_back(f.field);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Chart specifications

struct AxisAlignment {
  Channel axis = Channel::Y;
  std::string field;                     // display name of the shared field
  std::vector<std::string> categories;   // categorical domain order
  std::optional<std::pair<double, double>> numeric_domain;

  bool operator==(const AxisAlignment&) const = default;
};

/// A chart in stages: slot bindings first, alignment annotations later.
struct ChartSpec {
  std::string id;  // "<dataset id>/<chart type>"
  std::string chart_type;
  std::string dataset_id;
  DataType dtype = DataType::Tabular;
  std::map<Channel, FieldRef> bindings;
  std::vector<Channel> required;
  double relevance = 0.0;  // R' of the chart type
  bool complete = false;   // every required slot bound
  bool finalized = false;  // alignment bound, ready to render

  bool swapped = false;  // x/y exchanged during alignment
  bool lead = false;
  std::optional<AxisAlignment> alignment;
  std::map<std::string, std::string> palette;  // category -> color, when color aligned

  std::optional<FieldRef> bound(Channel c) const {
    auto it = bindings.find(c);
    if (it == bindings.end()) return std::nullopt;
    return it->second;
  }

  bool operator==(const ChartSpec&) const = default;
};

inline bool all_required_bound(const ChartSpec& spec) {
  return std::all_of(spec.required.begin(), spec.required.end(),
                     [&](Channel c) { return spec.bindings.count(c) > 0; });
}

/// First-fit in priority order: required slots first, then optional ones,
/// each in template order. Required slots backtrack, so the result is the
/// earliest complete assignment in priority order; optional slots then take
/// the highest-priority field they accept. Returns nullopt when no complete
/// assignment exists.
inline std::optional<ChartSpec> fill_template(const ChartTemplate& tpl, const std::string& dataset_id,
                                              std::span<const Field* const> priority, const SlotLimits& limits,
                                              const RelevanceTable& rel) {
  ChartSpec spec;
  spec.chart_type = tpl.chart_type;
  spec.dataset_id = dataset_id;
  spec.dtype = tpl.dtype;
  spec.id = dataset_id + "/" + tpl.chart_type;
  spec.relevance = rel.of(tpl.chart_type);

  std::vector<const EncodingSlot*> required, optional;
  for (const auto& s : tpl.slots) {
    if (s.required) {
      if (std::find(spec.required.begin(), spec.required.end(), s.channel) == spec.required.end()) {
        spec.required.push_back(s.channel);
        required.push_back(&s);
      }
    } else {
      optional.push_back(&s);
    }
  }
  std::vector<const Field*> own;
  for (const auto* f : priority) {
    if (f->source_id == dataset_id) own.push_back(f);
  }

  std::set<FieldRef> used;
  std::function<bool(std::size_t)> place = [&](std::size_t i) {
    if (i == required.size()) return true;
    const auto* slot = required[i];
    for (const auto* f : own) {
      if (!slot->reuse && used.count(f->ref())) continue;
      auto bound = assign_field_to_slot(*slot, *f, limits);
      if (!bound) continue;
      bool fresh = used.insert(f->ref()).second;
      spec.bindings[slot->channel] = *bound->field;
      if (place(i + 1)) return true;
      spec.bindings.erase(slot->channel);
      if (fresh) used.erase(f->ref());
    }
    return false;
  };
  if (!place(0)) return std::nullopt;

  for (const auto* slot : optional) {
    if (spec.bindings.count(slot->channel)) continue;
    for (const auto* f : own) {
      if (!slot->reuse && used.count(f->ref())) continue;
      if (auto bound = assign_field_to_slot(*slot, *f, limits)) {
        spec.bindings[slot->channel] = *bound->field;
        used.insert(*bound->field);
        break;
      }
    }
  }
  spec.complete = all_required_bound(spec);
  return spec;
}

/// Partial singleton specs for every dataset on a path. Only charts whose
/// required slots are all bound are kept; output is sorted by R' descending.
inline std::vector<ChartSpec> generate_single_chart_specs(std::span<const std::string> dataset_order,
                                                          std::span<const DataType> dataset_types,
                                                          std::span<const Field* const> priority,
                                                          std::span<const ChartTemplate> templates,
                                                          const TypeEncodingMap& map, const RelevanceTable& rel,
                                                          const SlotLimits& limits = {}) {
  std::vector<std::pair<std::size_t, ChartSpec>> specs;
  for (std::size_t d = 0; d < dataset_order.size(); ++d) {
    const auto& candidates = map.candidates(dataset_types[d]);
    for (const auto& tpl : templates) {
      if (tpl.dtype != dataset_types[d]) continue;
      if (std::find(candidates.begin(), candidates.end(), tpl.chart_type) == candidates.end()) continue;
      if (auto spec = fill_template(tpl, dataset_order[d], priority, limits, rel)) {
        specs.emplace_back(d, std::move(*spec));
      }
    }
  }
  std::stable_sort(specs.begin(), specs.end(), [](const auto& a, const auto& b) {
    if (a.second.relevance != b.second.relevance) return a.second.relevance > b.second.relevance;
    if (a.first != b.first) return a.first < b.first;
    return a.second.chart_type < b.second.chart_type;
  });
  std::vector<ChartSpec> out;
  for (auto& [_, s] : specs) out.push_back(std::move(s));
  return out;
}

inline nlohmann::json field_ref_json(const FieldRef& r) {
  return {{"source", r.source_id}, {"field", r.name}};
}

inline nlohmann::json chart_spec_json(const ChartSpec& s) {
  using nlohmann::json;
  json bindings = json::object();
  for (const auto& [ch, ref] : s.bindings) bindings[std::string(to_string(ch))] = field_ref_json(ref);
  json required = json::array();
  for (auto c : s.required) required.push_back(std::string(to_string(c)));
  json j = {{"id", s.id},
            {"chart_type", s.chart_type},
            {"dataset", s.dataset_id},
            {"dtype", std::string(to_string(s.dtype))},
            {"bindings", bindings},
            {"required", required},
            {"relevance", s.relevance},
            {"complete", s.complete},
            {"finalized", s.finalized},
            {"swapped", s.swapped},
            {"lead", s.lead}};
  if (s.alignment) {
    json a = {{"axis", std::string(to_string(s.alignment->axis))},
              {"field", s.alignment->field},
              {"categories", s.alignment->categories}};
    if (s.alignment->numeric_domain) {
      a["numeric_domain"] = {s.alignment->numeric_domain->first, s.alignment->numeric_domain->second};
    }
    j["alignment"] = a;
  }
  if (!s.palette.empty()) j["palette"] = s.palette;
  return j;
}

}  // namespace gevitrec
