#include "causalrd/network.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <queue>
#include <set>

#include "causalrd/error.hpp"

namespace causalrd {

std::string_view to_string(VariableKind kind) {
  switch (kind) {
    case VariableKind::Static: return "static";
    case VariableKind::Entry: return "entry";
    case VariableKind::PerSlice: return "per_slice";
    case VariableKind::Unrolled: return "unrolled";
  }
  return "static";
}

VariableKind parse_variable_kind(std::string_view text) {
  if (text == "static") return VariableKind::Static;
  if (text == "entry") return VariableKind::Entry;
  if (text == "per_slice") return VariableKind::PerSlice;
  if (text == "unrolled") return VariableKind::Unrolled;
  throw InvalidModel("unknown variable kind '" + std::string(text) + "'");
}

std::optional<std::size_t> VariableDef::state_index(std::string_view label) const {
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i] == label) return i;
  return std::nullopt;
}

NodeName parse_node_name(std::string_view name) {
  const auto at = name.rfind('@');
  if (at == std::string_view::npos) return {std::string(name), kStaticSlice};
  const auto base = name.substr(0, at);
  const auto suffix = name.substr(at + 1);
  if (suffix == "entry") return {std::string(base), kEntrySlice};
  int slice = 0;
  const auto [ptr, ec] = std::from_chars(suffix.data(), suffix.data() + suffix.size(), slice);
  if (ec != std::errc{} || ptr != suffix.data() + suffix.size() || slice < 0)
    return {std::string(name), kStaticSlice};
  return {std::string(base), slice};
}

std::string make_node_name(std::string_view base, int slice) {
  if (slice == kStaticSlice) return std::string(base);
  if (slice == kEntrySlice) return std::string(base) + "@entry";
  return std::string(base) + "@" + std::to_string(slice);
}

DiscreteNetwork::DiscreteNetwork(std::vector<VariableDef> variables, std::vector<Cpt> cpts,
                                 std::optional<Outcome> outcome)
    : variables_(std::move(variables)), cpts_(std::move(cpts)), outcome_(std::move(outcome)) {
  if (cpts_.size() != variables_.size())
    throw InvalidModel("expected one CPT per variable (" + std::to_string(variables_.size()) +
                       " variables, " + std::to_string(cpts_.size()) + " CPTs)");
  index();
}

void DiscreteNetwork::index() {
  names_.clear();
  by_name_.clear();
  children_.assign(variables_.size(), {});
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (!by_name_.emplace(variables_[i].name, i).second)
      throw InvalidModel("duplicate variable '" + variables_[i].name + "'");
    names_.push_back(parse_node_name(variables_[i].name));
  }
  for (std::size_t i = 0; i < cpts_.size(); ++i) {
    for (auto p : cpts_[i].parents) {
      if (p >= variables_.size())
        throw InvalidModel("parent index out of range for '" + variables_[i].name + "'");
      children_[p].push_back(i);
    }
  }
}

std::optional<std::size_t> DiscreteNetwork::find(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::size_t DiscreteNetwork::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw UnknownVariable("'" + std::string(name) + "'");
}

std::size_t DiscreteNetwork::state_of(std::size_t node, std::string_view label) const {
  if (auto s = variables_.at(node).state_index(label)) return *s;
  throw UnknownState("'" + std::string(label) + "' for variable '" + variables_[node].name + "'");
}

bool DiscreteNetwork::is_outcome(std::size_t i) const {
  return outcome_ && names_[i].base == outcome_->variable;
}

std::optional<std::size_t> DiscreteNetwork::outcome_node(int t) const {
  if (!outcome_) return std::nullopt;
  return find(make_node_name(outcome_->variable, t));
}

std::size_t DiscreteNetwork::positive_state(std::size_t node) const {
  if (outcome_ && !outcome_->positive_state.empty()) return state_of(node, outcome_->positive_state);
  return cardinality(node) - 1;
}

std::size_t DiscreteNetwork::row_count(std::size_t i) const {
  std::size_t rows = 1;
  for (auto p : cpts_[i].parents) rows *= cardinality(p);
  return rows;
}

std::size_t DiscreteNetwork::row_index(std::size_t i, std::span<const int> assignment) const {
  std::size_t row = 0;
  for (auto p : cpts_[i].parents) row = row * cardinality(p) + static_cast<std::size_t>(assignment[p]);
  return row;
}

std::vector<std::pair<std::size_t, std::size_t>> DiscreteNetwork::arcs() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t c = 0; c < cpts_.size(); ++c)
    for (auto p : cpts_[c].parents) out.emplace_back(p, c);
  return out;
}

DiscreteNetwork DiscreteNetwork::with_cpt(std::size_t i, Cpt cpt) const {
  auto cpts = cpts_;
  cpts.at(i) = std::move(cpt);
  return DiscreteNetwork(variables_, std::move(cpts), outcome_);
}

DiscreteNetwork DiscreteNetwork::with_tables(std::vector<std::vector<double>> tables) const {
  if (tables.size() != cpts_.size()) throw InvalidModel("table count mismatch");
  auto cpts = cpts_;
  for (std::size_t i = 0; i < cpts.size(); ++i) cpts[i].table = std::move(tables[i]);
  return DiscreteNetwork(variables_, std::move(cpts), outcome_);
}

Cpt uniform_cpt(const std::vector<VariableDef>& variables, std::size_t child,
                std::vector<std::size_t> parents) {
  std::size_t rows = 1;
  for (auto p : parents) rows *= variables.at(p).cardinality();
  const auto card = variables.at(child).cardinality();
  return Cpt{std::move(parents), std::vector<double>(rows * card, 1.0 / static_cast<double>(card))};
}

namespace {

// Returns a cycle as a node sequence, or empty.
std::vector<std::size_t> find_cycle(const DiscreteNetwork& net) {
  const auto n = net.size();
  std::vector<int> color(n, 0);
  for (std::size_t root = 0; root < n; ++root) {
    if (color[root] != 0) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    color[root] = 1;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      auto kids = net.children(node);
      if (next < kids.size()) {
        const auto child = kids[next++];
        if (color[child] == 1) {
          std::vector<std::size_t> cycle;
          for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
            cycle.push_back(it->first);
            if (it->first == child) break;
          }
          std::reverse(cycle.begin(), cycle.end());
          return cycle;
        }
        if (color[child] == 0) {
          color[child] = 1;
          stack.emplace_back(child, 0);
        }
      } else {
        color[node] = 2;
        stack.pop_back();
      }
    }
  }
  return {};
}

}  // namespace

ValidationReport validate_network(const DiscreteNetwork& net) {
  ValidationReport report;
  using K = Violation::Kind;

  for (std::size_t i = 0; i < net.size(); ++i) {
    const auto& v = net.variable(i);
    if (v.states.size() < 2)
      report.violations.push_back({K::BadVariable, v.name, 0, "fewer than 2 states"});
    std::set<std::string> seen(v.states.begin(), v.states.end());
    if (seen.size() != v.states.size())
      report.violations.push_back({K::BadVariable, v.name, 0, "duplicate state labels"});
    if (!v.intervals.empty()) {
      if (v.intervals.size() != v.states.size()) {
        report.violations.push_back({K::BadVariable, v.name, 0, "interval count differs from state count"});
      } else {
        for (std::size_t s = 0; s < v.intervals.size(); ++s) {
          const auto& iv = v.intervals[s];
          const bool bad_self = !(iv.lo < iv.hi);
          const bool bad_order = s > 0 && v.intervals[s - 1].hi > iv.lo;
          if (bad_self || bad_order)
            report.violations.push_back({K::BadVariable, v.name, s, "intervals must be disjoint and ordered"});
        }
      }
    }
  }

  if (auto cycle = find_cycle(net); !cycle.empty()) {
    std::string msg;
    for (auto c : cycle) {
      report.cycle.push_back(net.variable(c).name);
      msg += net.variable(c).name + " -> ";
    }
    msg += net.variable(cycle.front()).name;
    report.violations.push_back({K::Cycle, net.variable(cycle.front()).name, 0, msg});
  }

  for (std::size_t i = 0; i < net.size(); ++i) {
    const auto& name = net.variable(i).name;
    const auto& cpt = net.cpt(i);
    std::set<std::size_t> uniq(cpt.parents.begin(), cpt.parents.end());
    if (uniq.size() != cpt.parents.size())
      report.violations.push_back({K::Arity, name, 0, "repeated parent"});
    const auto card = net.cardinality(i);
    const auto rows = net.row_count(i);
    if (card == 0 || cpt.table.size() != rows * card) {
      report.violations.push_back({K::Arity, name, 0,
                                   "table has " + std::to_string(cpt.table.size()) + " entries, expected " +
                                       std::to_string(rows * card)});
      continue;
    }
    for (std::size_t r = 0; r < rows; ++r) {
      double sum = 0.0;
      bool in_range = true;
      for (std::size_t s = 0; s < card; ++s) {
        const double p = cpt.table[r * card + s];
        if (!(p >= 0.0 && p <= 1.0)) in_range = false;
        sum += p;
      }
      if (!in_range || std::abs(sum - 1.0) > kRowTolerance)
        report.violations.push_back({K::Unnormalized, name, r,
                                     "row " + std::to_string(r) + " sums to " + std::to_string(sum)});
    }
  }

  if (const auto& out = net.outcome()) {
    bool any = false;
    for (std::size_t i = 0; i < net.size(); ++i) {
      if (!net.is_outcome(i)) continue;
      any = true;
      if (!out->positive_state.empty() && !net.variable(i).state_index(out->positive_state))
        report.violations.push_back({K::BadOutcome, net.variable(i).name, 0,
                                     "positive state '" + out->positive_state + "' missing"});
    }
    if (!any && net.size() > 0)
      report.violations.push_back({K::BadOutcome, out->variable, 0, "outcome variable has no nodes"});
  }
  return report;
}

void require_valid(const DiscreteNetwork& net) {
  const auto report = validate_network(net);
  if (report.ok()) return;
  for (const auto& v : report.violations)
    if (v.kind == Violation::Kind::Cycle) throw CyclicGraph(v.message);
  for (const auto& v : report.violations)
    if (v.kind == Violation::Kind::Unnormalized) throw UnnormalizedCpt("'" + v.node + "' " + v.message);
  const auto& v = report.violations.front();
  throw InvalidModel("'" + v.node + "': " + v.message);
}

std::vector<std::size_t> topological_order(const DiscreteNetwork& net) {
  const auto n = net.size();
  std::vector<std::size_t> indegree(n);
  for (std::size_t i = 0; i < n; ++i) indegree[i] = net.parents(i).size();
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indegree[i] == 0) ready.push(i);
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    const auto i = ready.top();
    ready.pop();
    order.push_back(i);
    for (auto c : net.children(i))
      if (--indegree[c] == 0) ready.push(c);
  }
  if (order.size() != n) throw CyclicGraph("network is not acyclic");
  return order;
}

DiscreteNetwork mutilate(const DiscreteNetwork& net, std::size_t target) {
  if (target >= net.size()) throw UnknownVariable("index " + std::to_string(target));
  return net.with_cpt(target, uniform_cpt(net.variables(), target, {}));
}

DiscreteNetwork mutilate(const DiscreteNetwork& net, std::string_view target) {
  return mutilate(net, net.index_of(target));
}

bool has_directed_path(const DiscreteNetwork& net, std::size_t from, std::size_t to) {
  if (from >= net.size()) throw UnknownVariable("index " + std::to_string(from));
  if (to >= net.size()) throw UnknownVariable("index " + std::to_string(to));
  if (from == to) return false;
  std::vector<bool> seen(net.size(), false);
  std::vector<std::size_t> stack{from};
  seen[from] = true;
  while (!stack.empty()) {
    const auto i = stack.back();
    stack.pop_back();
    for (auto c : net.children(i)) {
      if (c == to) return true;
      if (!seen[c]) {
        seen[c] = true;
        stack.push_back(c);
      }
    }
  }
  return false;
}

bool has_directed_path(const DiscreteNetwork& net, std::string_view from, std::string_view to) {
  return has_directed_path(net, net.index_of(from), net.index_of(to));
}

std::vector<bool> ancestral_set(const DiscreteNetwork& net, std::span<const std::size_t> seeds) {
  std::vector<bool> in(net.size(), false);
  std::vector<std::size_t> stack;
  for (auto s : seeds) {
    if (!in[s]) {
      in[s] = true;
      stack.push_back(s);
    }
  }
  while (!stack.empty()) {
    const auto i = stack.back();
    stack.pop_back();
    for (auto p : net.parents(i)) {
      if (!in[p]) {
        in[p] = true;
        stack.push_back(p);
      }
    }
  }
  return in;
}

}  // namespace causalrd
