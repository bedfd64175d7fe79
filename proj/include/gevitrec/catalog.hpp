#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "gevitrec/dataset.hpp"
#include "gevitrec/error.hpp"
#include "gevitrec/fields.hpp"

namespace gevitrec {

/// Non-owning lookup over loaded datasets and their exploded fields.
class Catalog {
 public:
  Catalog() = default;
  Catalog(std::span<const Dataset> datasets, std::span<const Field> fields) {
    for (const auto& d : datasets) datasets_[d.id] = &d;
    for (const auto& f : fields) fields_[f.ref()] = &f;
  }

  const Dataset& dataset(const std::string& id) const {
    auto it = datasets_.find(id);
    if (it == datasets_.end()) throw Error(ErrorCode::UnknownDataset, "unknown dataset '" + id + "'");
    return *it->second;
  }

  const Field& field(const FieldRef& ref) const {
    auto it = fields_.find(ref);
    if (it == fields_.end()) {
      throw Error(ErrorCode::DataMismatch, "unknown field '" + ref.name + "' in '" + ref.source_id + "'");
    }
    return *it->second;
  }

  bool has_field(const FieldRef& ref) const { return fields_.count(ref) > 0; }

  /// Raw record values of a field, aligned with the dataset's records.
  const std::vector<std::string>& column(const FieldRef& ref) const {
    return dataset(ref.source_id).records.column(ref.name);
  }

 private:
  std::map<std::string, const Dataset*> datasets_;
  std::map<FieldRef, const Field*> fields_;
};

}  // namespace gevitrec
