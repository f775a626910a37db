#include "causalrd/model_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <unordered_map>

#include "causalrd/error.hpp"

namespace causalrd {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Json interval_bound(double v) {
  if (std::isinf(v)) return nullptr;
  return v;
}

double parse_bound(const Json& j, double missing) {
  if (j.is_null()) return missing;
  return j.get<double>();
}

Json variable_json(const VariableDef& v) {
  Json j;
  j["name"] = v.name;
  j["states"] = v.states;
  j["kind"] = std::string(to_string(v.kind));
  if (!v.intervals.empty()) {
    Json iv = Json::array();
    for (const auto& i : v.intervals) iv.push_back(Json::array({interval_bound(i.lo), interval_bound(i.hi)}));
    j["intervals"] = std::move(iv);
  }
  return j;
}

VariableDef variable_from_json(const Json& j) {
  VariableDef v;
  v.name = j.at("name").get<std::string>();
  v.states = j.at("states").get<std::vector<std::string>>();
  v.kind = parse_variable_kind(j.value("kind", std::string("static")));
  if (j.contains("intervals")) {
    for (const auto& iv : j.at("intervals")) {
      if (!iv.is_array() || iv.size() != 2) throw InvalidModel("interval of '" + v.name + "' must be [lo, hi]");
      v.intervals.push_back({parse_bound(iv[0], -kInf), parse_bound(iv[1], kInf)});
    }
  }
  return v;
}

std::vector<BaseArc> arcs_from_json(const Json& j) {
  std::vector<BaseArc> out;
  for (const auto& a : j) {
    if (!a.is_array() || a.size() < 2) throw InvalidModel("arc must be [from, to]");
    out.emplace_back(a[0].get<std::string>(), a[1].get<std::string>());
  }
  return out;
}

std::vector<StaticArc> static_arcs_from_json(const Json& j) {
  std::vector<StaticArc> out;
  for (const auto& a : j) {
    if (!a.is_array() || a.size() < 2 || a.size() > 3) throw InvalidModel("static arc must be [from, to, slices?]");
    StaticArc arc{a[0].get<std::string>(), a[1].get<std::string>(), {}};
    if (a.size() == 3) {
      if (a[2].is_number_integer())
        arc.slices.push_back(a[2].get<int>());
      else if (a[2].is_array())
        arc.slices = a[2].get<std::vector<int>>();
      else if (!(a[2].is_string() && a[2].get<std::string>() == "all"))
        throw InvalidModel("static arc scope must be \"all\", a slice, or a list of slices");
    }
    out.push_back(std::move(arc));
  }
  return out;
}

Json arcs_json(const std::vector<BaseArc>& arcs) {
  Json out = Json::array();
  for (const auto& [a, b] : arcs) out.push_back(Json::array({a, b}));
  return out;
}

std::vector<double> rows_from_json(const Json& rows, const std::string& node) {
  std::vector<double> table;
  for (const auto& row : rows) {
    if (!row.is_array()) throw InvalidModel("cpt rows of '" + node + "' must be arrays");
    for (const auto& p : row) table.push_back(p.get<double>());
  }
  return table;
}

Json rows_json(const std::vector<double>& table, std::size_t card) {
  Json rows = Json::array();
  for (std::size_t r = 0; card > 0 && r * card < table.size(); ++r)
    rows.push_back(std::vector<double>(table.begin() + static_cast<std::ptrdiff_t>(r * card),
                                       table.begin() + static_cast<std::ptrdiff_t>((r + 1) * card)));
  return rows;
}

std::optional<Outcome> outcome_from_json(const Json& doc) {
  if (!doc.contains("outcome")) return std::nullopt;
  const auto& o = doc.at("outcome");
  return Outcome{o.at("variable").get<std::string>(), o.value("positive_state", std::string())};
}

void outcome_to_json(Json& doc, const std::optional<Outcome>& outcome) {
  if (!outcome) return;
  doc["outcome"] = {{"variable", outcome->variable}, {"positive_state", outcome->positive_state}};
}

DiscreteNetwork literal_network(const Json& doc, std::vector<VariableDef> vars) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < vars.size(); ++i)
    if (!index.emplace(vars[i].name, i).second) throw InvalidModel("duplicate variable '" + vars[i].name + "'");
  auto node = [&](const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) throw InvalidModel("arc references unknown node '" + name + "'");
    return it->second;
  };

  std::vector<std::vector<std::size_t>> arc_parents(vars.size());
  if (doc.contains("template")) {
    const auto& t = doc.at("template");
    for (const char* key : {"slice0_arcs", "intra_arcs", "inter_arcs", "static_arcs"}) {
      if (!t.contains(key)) continue;
      for (const auto& a : t.at(key)) {
        if (!a.is_array() || a.size() < 2) throw InvalidModel("arc must be [from, to]");
        const auto p = node(a[0].get<std::string>());
        auto& list = arc_parents[node(a[1].get<std::string>())];
        if (std::find(list.begin(), list.end(), p) == list.end()) list.push_back(p);
      }
    }
  }

  std::vector<Cpt> cpts(vars.size());
  const Json empty = Json::object();
  const auto& cj = doc.contains("cpts") ? doc.at("cpts") : empty;
  for (const auto& [name, _] : cj.items())
    if (!index.count(name)) throw InvalidModel("cpt for unknown node '" + name + "'");
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (!cj.contains(vars[i].name)) {
      cpts[i] = uniform_cpt(vars, i, arc_parents[i]);
      if (!cj.empty()) throw InvalidModel("no CPT for node '" + vars[i].name + "'");
      continue;
    }
    const auto& c = cj.at(vars[i].name);
    Cpt cpt;
    for (const auto& p : c.value("parents", Json::array())) cpt.parents.push_back(node(p.get<std::string>()));
    cpt.table = rows_from_json(c.at("rows"), vars[i].name);
    if (doc.contains("template")) {
      std::set<std::size_t> a(cpt.parents.begin(), cpt.parents.end());
      std::set<std::size_t> b(arc_parents[i].begin(), arc_parents[i].end());
      if (a != b) throw InvalidModel("cpt parents of '" + vars[i].name + "' disagree with the arcs");
    }
    cpts[i] = std::move(cpt);
  }
  return DiscreteNetwork(std::move(vars), std::move(cpts), outcome_from_json(doc));
}

}  // namespace

ModelDocument model_from_json(const Json& doc) {
  std::vector<VariableDef> vars;
  for (const auto& v : doc.at("variables")) vars.push_back(variable_from_json(v));
  const bool is_template = std::any_of(vars.begin(), vars.end(),
                                       [](const VariableDef& v) { return v.kind == VariableKind::PerSlice; });
  if (!is_template) {
    DiscreteNetwork net = literal_network(doc, std::move(vars));
    require_valid(net);
    return net;
  }

  DbnTemplate tpl;
  tpl.variables = std::move(vars);
  if (doc.contains("template")) {
    const auto& t = doc.at("template");
    if (t.contains("slice0_arcs")) tpl.slice0_arcs = arcs_from_json(t.at("slice0_arcs"));
    if (t.contains("intra_arcs")) tpl.intra_arcs = arcs_from_json(t.at("intra_arcs"));
    if (t.contains("inter_arcs")) tpl.inter_arcs = arcs_from_json(t.at("inter_arcs"));
    if (t.contains("static_arcs")) tpl.static_arcs = static_arcs_from_json(t.at("static_arcs"));
  }
  if (doc.contains("cpts")) {
    for (const auto& [key, c] : doc.at("cpts").items()) {
      TemplateCpt tc;
      tc.parents = c.value("parents", std::vector<std::string>{});
      tc.table = rows_from_json(c.at("rows"), key);
      tpl.cpts.emplace(key, std::move(tc));
    }
  }
  tpl.outcome = outcome_from_json(doc);
  if (doc.contains("horizon")) tpl.horizon = doc.at("horizon").get<int>();
  validate_template(tpl);
  return tpl;
}

Json to_json(const DiscreteNetwork& net) {
  Json doc;
  Json vars = Json::array();
  for (const auto& v : net.variables()) vars.push_back(variable_json(v));
  doc["variables"] = std::move(vars);
  Json arcs = Json::array();
  for (const auto& [p, c] : net.arcs()) arcs.push_back(Json::array({net.variable(p).name, net.variable(c).name}));
  doc["template"] = {{"slice0_arcs", Json::array()},
                     {"intra_arcs", std::move(arcs)},
                     {"inter_arcs", Json::array()},
                     {"static_arcs", Json::array()}};
  Json cpts = Json::object();
  for (std::size_t i = 0; i < net.size(); ++i) {
    Json parents = Json::array();
    for (auto p : net.parents(i)) parents.push_back(net.variable(p).name);
    cpts[net.variable(i).name] = {{"parents", std::move(parents)},
                                  {"rows", rows_json(net.cpt(i).table, net.cardinality(i))}};
  }
  doc["cpts"] = std::move(cpts);
  outcome_to_json(doc, net.outcome());
  return doc;
}

Json to_json(const DbnTemplate& tpl) {
  Json doc;
  Json vars = Json::array();
  for (const auto& v : tpl.variables) vars.push_back(variable_json(v));
  doc["variables"] = std::move(vars);
  Json statics = Json::array();
  for (const auto& a : tpl.static_arcs) {
    if (a.slices.empty())
      statics.push_back(Json::array({a.from, a.to}));
    else
      statics.push_back(Json::array({a.from, a.to, a.slices}));
  }
  doc["template"] = {{"slice0_arcs", arcs_json(tpl.slice0_arcs)},
                     {"intra_arcs", arcs_json(tpl.intra_arcs)},
                     {"inter_arcs", arcs_json(tpl.inter_arcs)},
                     {"static_arcs", std::move(statics)}};
  if (!tpl.cpts.empty()) {
    Json cpts = Json::object();
    for (const auto& [key, c] : tpl.cpts) {
      const auto* v = tpl.find(key.substr(0, key.find('@')));
      const std::size_t card = v ? v->cardinality() : 0;
      cpts[key] = {{"parents", c.parents}, {"rows", rows_json(c.table, card)}};
    }
    doc["cpts"] = std::move(cpts);
  }
  outcome_to_json(doc, tpl.outcome);
  if (tpl.horizon) doc["horizon"] = *tpl.horizon;
  return doc;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& doc) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

ModelDocument load_model(const std::filesystem::path& path) {
  const Json doc = read_json_file(path);
  try {
    return model_from_json(doc);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidModel("'" + path.string() + "': " + e.what());
  }
}

DiscreteNetwork to_network(const ModelDocument& doc, std::optional<int> horizon) {
  if (const auto* net = std::get_if<DiscreteNetwork>(&doc)) return *net;
  const auto& tpl = std::get<DbnTemplate>(doc);
  const auto h = horizon ? horizon : tpl.horizon;
  if (!h) throw InvalidModel("template model needs a horizon to unroll");
  return unroll(tpl, *h);
}

DiscreteNetwork load_network(const std::filesystem::path& path, std::optional<int> horizon) {
  return to_network(load_model(path), horizon);
}

void save_network(const std::filesystem::path& path, const DiscreteNetwork& net) {
  write_json_file(path, to_json(net));
}

}  // namespace causalrd
