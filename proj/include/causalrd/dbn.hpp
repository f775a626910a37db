#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "causalrd/network.hpp"

namespace causalrd {

// Arc from a static/entry variable. `slices` restricts which slices of a
// per_slice child receive the arc; empty means every slice.
struct StaticArc {
  std::string from;
  std::string to;
  std::vector<int> slices;
  bool operator==(const StaticArc&) const = default;
};

// CPT in template notation. Parent references are `p` (static), `p@entry`,
// `p@t`, `p@t-1`, or a literal slice `p@k`. Keys in DbnTemplate::cpts are
// `v`, `v@entry`, `v@0` (first slice), `v@t` (every later slice) or `v@k`
// (override for one slice).
struct TemplateCpt {
  std::vector<std::string> parents;
  std::vector<double> table;
  bool operator==(const TemplateCpt&) const = default;
};

using BaseArc = std::pair<std::string, std::string>;

struct DbnTemplate {
  std::vector<VariableDef> variables;
  std::vector<BaseArc> slice0_arcs;  // within slice 0
  std::vector<BaseArc> intra_arcs;   // within slice t, t >= 1
  std::vector<BaseArc> inter_arcs;   // v@t-1 -> w@t, t >= 1
  std::vector<StaticArc> static_arcs;
  std::map<std::string, TemplateCpt> cpts;  // empty: structure only
  std::optional<Outcome> outcome;
  std::optional<int> horizon;  // default for unroll when not given

  const VariableDef* find(const std::string& base) const;
  bool operator==(const DbnTemplate&) const = default;
};

// Structural checks that do not depend on the horizon. Throws InvalidModel.
void validate_template(const DbnTemplate& tpl);

// Instantiates slices 0..horizon. Static and entry variables appear once.
// Node order: static, entry, then slice-major per_slice. Structure-only
// templates yield uniform CPTs with parents in arc declaration order.
// Throws CyclicGraph, InvalidModel.
DiscreteNetwork unroll(const DbnTemplate& tpl, int horizon);

}  // namespace causalrd
