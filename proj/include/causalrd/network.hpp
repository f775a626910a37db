#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace causalrd {

enum class VariableKind { Static, Entry, PerSlice, Unrolled };

std::string_view to_string(VariableKind kind);
VariableKind parse_variable_kind(std::string_view text);

// Half-open [lo, hi); infinities mark open ends.
struct Interval {
  double lo;
  double hi;
  bool operator==(const Interval&) const = default;
};

struct VariableDef {
  std::string name;
  std::vector<std::string> states;
  VariableKind kind = VariableKind::Static;
  std::vector<Interval> intervals;  // empty, or one per state

  std::size_t cardinality() const { return states.size(); }
  std::optional<std::size_t> state_index(std::string_view label) const;
  bool operator==(const VariableDef&) const = default;
};

// Slice decoded from the node naming convention: `v@3`, `v@entry`, `v`.
inline constexpr int kStaticSlice = -2;
inline constexpr int kEntrySlice = -1;

struct NodeName {
  std::string base;
  int slice = kStaticSlice;
};

NodeName parse_node_name(std::string_view name);
std::string make_node_name(std::string_view base, int slice);

// Conditional probability table. Rows are indexed mixed-radix over the
// parents in declared order, first parent most significant; within a row the
// child's states are contiguous.
struct Cpt {
  std::vector<std::size_t> parents;
  std::vector<double> table;
  bool operator==(const Cpt&) const = default;
};

struct Outcome {
  std::string variable;  // base name, e.g. "decline" for decline@1..decline@T
  std::string positive_state;
  bool operator==(const Outcome&) const = default;
};

// DAG over categorical variables with one CPT per node. Immutable once built;
// transformations return new networks.
class DiscreteNetwork {
 public:
  DiscreteNetwork() = default;
  DiscreteNetwork(std::vector<VariableDef> variables, std::vector<Cpt> cpts,
                  std::optional<Outcome> outcome = std::nullopt);

  std::size_t size() const { return variables_.size(); }
  const VariableDef& variable(std::size_t i) const { return variables_.at(i); }
  const std::vector<VariableDef>& variables() const { return variables_; }
  const Cpt& cpt(std::size_t i) const { return cpts_.at(i); }
  const std::vector<Cpt>& cpts() const { return cpts_; }
  std::size_t cardinality(std::size_t i) const { return variables_[i].states.size(); }
  std::span<const std::size_t> parents(std::size_t i) const { return cpts_[i].parents; }
  std::span<const std::size_t> children(std::size_t i) const { return children_[i]; }
  const std::optional<Outcome>& outcome() const { return outcome_; }

  std::optional<std::size_t> find(std::string_view name) const;
  // Throws UnknownVariable.
  std::size_t index_of(std::string_view name) const;
  std::size_t state_of(std::size_t node, std::string_view label) const;

  const NodeName& node_name(std::size_t i) const { return names_[i]; }
  int slice(std::size_t i) const { return names_[i].slice; }

  // True when node i instantiates the designated outcome variable.
  bool is_outcome(std::size_t i) const;
  // Node index of the outcome at time t, if present.
  std::optional<std::size_t> outcome_node(int t) const;
  std::size_t positive_state(std::size_t outcome_node) const;

  std::size_t row_count(std::size_t i) const;
  // Mixed-radix row for a full (or parent-covering) assignment.
  std::size_t row_index(std::size_t i, std::span<const int> assignment) const;
  double probability(std::size_t i, std::size_t row, std::size_t state) const {
    return cpts_[i].table[row * cardinality(i) + state];
  }

  std::vector<std::pair<std::size_t, std::size_t>> arcs() const;

  DiscreteNetwork with_cpt(std::size_t i, Cpt cpt) const;
  DiscreteNetwork with_tables(std::vector<std::vector<double>> tables) const;

  bool operator==(const DiscreteNetwork& other) const {
    return variables_ == other.variables_ && cpts_ == other.cpts_ && outcome_ == other.outcome_;
  }

 private:
  void index();

  std::vector<VariableDef> variables_;
  std::vector<Cpt> cpts_;
  std::optional<Outcome> outcome_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<NodeName> names_;
  std::unordered_map<std::string, std::size_t> by_name_;
};

Cpt uniform_cpt(const std::vector<VariableDef>& variables, std::size_t child,
                std::vector<std::size_t> parents);

struct Violation {
  enum class Kind { Cycle, Unnormalized, Arity, BadVariable, BadOutcome };
  Kind kind;
  std::string node;
  std::size_t row = 0;
  std::string message;
};

struct ValidationReport {
  std::vector<std::string> cycle;  // witness, in arc order
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

inline constexpr double kRowTolerance = 1e-9;

ValidationReport validate_network(const DiscreteNetwork& net);
// Throws CyclicGraph / UnnormalizedCpt / InvalidModel on the first violation kind found.
void require_valid(const DiscreteNetwork& net);

// Kahn order, ties by index. Throws CyclicGraph.
std::vector<std::size_t> topological_order(const DiscreteNetwork& net);

// Removes every arc into `target` and gives it a uniform prior.
DiscreteNetwork mutilate(const DiscreteNetwork& net, std::size_t target);
DiscreteNetwork mutilate(const DiscreteNetwork& net, std::string_view target);

bool has_directed_path(const DiscreteNetwork& net, std::size_t from, std::size_t to);
bool has_directed_path(const DiscreteNetwork& net, std::string_view from, std::string_view to);

// Nodes that are ancestors of any seed (seeds included).
std::vector<bool> ancestral_set(const DiscreteNetwork& net, std::span<const std::size_t> seeds);

}  // namespace causalrd
