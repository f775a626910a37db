#include "causalrd/dbn.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "causalrd/error.hpp"

namespace causalrd {

const VariableDef* DbnTemplate::find(const std::string& base) const {
  for (const auto& v : variables)
    if (v.name == base) return &v;
  return nullptr;
}

namespace {

const VariableDef& require_var(const DbnTemplate& tpl, const std::string& base, const char* where) {
  if (const auto* v = tpl.find(base)) return *v;
  throw InvalidModel(std::string(where) + " references unknown variable '" + base + "'");
}

void require_per_slice(const DbnTemplate& tpl, const BaseArc& arc, const char* where) {
  for (const auto* name : {&arc.first, &arc.second}) {
    if (require_var(tpl, *name, where).kind != VariableKind::PerSlice)
      throw InvalidModel(std::string(where) + " arc " + arc.first + "->" + arc.second +
                         " must join per_slice variables");
  }
}

int slice_of(const VariableDef& v, int t) {
  switch (v.kind) {
    case VariableKind::Static: return kStaticSlice;
    case VariableKind::Entry: return kEntrySlice;
    default: return t;
  }
}

// Resolves a template parent reference at slice t.
std::string resolve_ref(const DbnTemplate& tpl, const std::string& ref, int t) {
  const auto at = ref.rfind('@');
  const std::string base = at == std::string::npos ? ref : ref.substr(0, at);
  const auto& v = require_var(tpl, base, "cpt parent");
  if (at == std::string::npos) {
    if (v.kind != VariableKind::Static) throw InvalidModel("cpt parent '" + ref + "' needs a slice suffix");
    return base;
  }
  const std::string suffix = ref.substr(at + 1);
  if (suffix == "entry") return make_node_name(base, kEntrySlice);
  int slice = -1;
  if (suffix == "t") {
    slice = t;
  } else if (suffix == "t-1") {
    slice = t - 1;
  } else {
    const auto [ptr, ec] = std::from_chars(suffix.data(), suffix.data() + suffix.size(), slice);
    if (ec != std::errc{} || ptr != suffix.data() + suffix.size())
      throw InvalidModel("bad cpt parent reference '" + ref + "'");
  }
  if (slice < 0) throw InvalidModel("cpt parent '" + ref + "' resolves before slice 0 at t=" + std::to_string(t));
  return make_node_name(base, slice);
}

const TemplateCpt* lookup_cpt(const DbnTemplate& tpl, const VariableDef& v, int t) {
  auto get = [&](const std::string& key) -> const TemplateCpt* {
    auto it = tpl.cpts.find(key);
    return it == tpl.cpts.end() ? nullptr : &it->second;
  };
  switch (v.kind) {
    case VariableKind::Static: return get(v.name);
    case VariableKind::Entry: return get(make_node_name(v.name, kEntrySlice));
    default:
      if (const auto* exact = get(make_node_name(v.name, t))) return exact;
      return t >= 1 ? get(v.name + "@t") : nullptr;
  }
}

}  // namespace

void validate_template(const DbnTemplate& tpl) {
  std::set<std::string> names;
  for (const auto& v : tpl.variables) {
    if (v.kind == VariableKind::Unrolled) throw InvalidModel("template variable '" + v.name + "' has kind unrolled");
    if (v.name.find('@') != std::string::npos) throw InvalidModel("template variable '" + v.name + "' contains '@'");
    if (!names.insert(v.name).second) throw InvalidModel("duplicate variable '" + v.name + "'");
  }
  for (const auto& a : tpl.slice0_arcs) require_per_slice(tpl, a, "slice0");
  for (const auto& a : tpl.intra_arcs) require_per_slice(tpl, a, "intra-slice");
  for (const auto& a : tpl.inter_arcs) require_per_slice(tpl, a, "inter-slice");
  for (const auto& a : tpl.static_arcs) {
    const auto& from = require_var(tpl, a.from, "static arc");
    require_var(tpl, a.to, "static arc");
    if (from.kind == VariableKind::PerSlice)
      throw InvalidModel("static arc source '" + a.from + "' must be static or entry");
    for (int s : a.slices)
      if (s < 0) throw InvalidModel("static arc slice must be >= 0");
  }
  if (tpl.outcome) {
    const auto& v = require_var(tpl, tpl.outcome->variable, "outcome");
    if (!tpl.outcome->positive_state.empty() && !v.state_index(tpl.outcome->positive_state))
      throw InvalidModel("outcome positive state '" + tpl.outcome->positive_state + "' not a state of '" +
                         v.name + "'");
  }
}

DiscreteNetwork unroll(const DbnTemplate& tpl, int horizon) {
  if (horizon < 1) throw InvalidModel("horizon must be >= 1");
  validate_template(tpl);

  std::vector<VariableDef> nodes;
  auto emit = [&](const VariableDef& v, int slice) {
    VariableDef node = v;
    node.name = make_node_name(v.name, slice);
    if (v.kind == VariableKind::PerSlice) node.kind = VariableKind::Unrolled;
    nodes.push_back(std::move(node));
  };
  for (const auto& v : tpl.variables)
    if (v.kind == VariableKind::Static) emit(v, kStaticSlice);
  for (const auto& v : tpl.variables)
    if (v.kind == VariableKind::Entry) emit(v, kEntrySlice);
  for (int t = 0; t <= horizon; ++t)
    for (const auto& v : tpl.variables)
      if (v.kind == VariableKind::PerSlice) emit(v, t);

  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < nodes.size(); ++i) index.emplace(nodes[i].name, i);

  std::vector<std::vector<std::size_t>> parents(nodes.size());
  auto add_arc = [&](const std::string& from, const std::string& to) {
    const auto p = index.at(from);
    auto& list = parents[index.at(to)];
    if (std::find(list.begin(), list.end(), p) == list.end()) list.push_back(p);
  };

  for (const auto& a : tpl.static_arcs) {
    const auto& from = *tpl.find(a.from);
    const auto& to = *tpl.find(a.to);
    const auto src = make_node_name(from.name, slice_of(from, 0));
    if (to.kind != VariableKind::PerSlice) {
      add_arc(src, make_node_name(to.name, slice_of(to, 0)));
      continue;
    }
    for (int t = 0; t <= horizon; ++t) {
      const bool in_scope = a.slices.empty() || std::find(a.slices.begin(), a.slices.end(), t) != a.slices.end();
      if (in_scope) add_arc(src, make_node_name(to.name, t));
    }
  }
  for (const auto& [from, to] : tpl.slice0_arcs) add_arc(make_node_name(from, 0), make_node_name(to, 0));
  for (int t = 1; t <= horizon; ++t) {
    for (const auto& [from, to] : tpl.intra_arcs) add_arc(make_node_name(from, t), make_node_name(to, t));
    for (const auto& [from, to] : tpl.inter_arcs) add_arc(make_node_name(from, t - 1), make_node_name(to, t));
  }

  std::vector<Cpt> cpts(nodes.size());
  const bool structure_only = tpl.cpts.empty();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (structure_only) {
      cpts[i] = uniform_cpt(nodes, i, parents[i]);
      continue;
    }
    const auto parsed = parse_node_name(nodes[i].name);
    const auto& var = *tpl.find(parsed.base);
    const int t = parsed.slice;
    const auto* tc = lookup_cpt(tpl, var, t);
    if (!tc) throw InvalidModel("no CPT for node '" + nodes[i].name + "'");
    Cpt cpt;
    for (const auto& ref : tc->parents) {
      const auto resolved = resolve_ref(tpl, ref, t);
      auto it = index.find(resolved);
      if (it == index.end()) throw InvalidModel("cpt parent '" + resolved + "' of '" + nodes[i].name + "' is not a node");
      cpt.parents.push_back(it->second);
    }
    std::set<std::size_t> declared(cpt.parents.begin(), cpt.parents.end());
    std::set<std::size_t> from_arcs(parents[i].begin(), parents[i].end());
    if (declared != from_arcs)
      throw InvalidModel("cpt parents of '" + nodes[i].name + "' disagree with the template arcs");
    cpt.table = tc->table;
    cpts[i] = std::move(cpt);
  }

  DiscreteNetwork net(std::move(nodes), std::move(cpts), tpl.outcome);
  require_valid(net);
  return net;
}

}  // namespace causalrd
