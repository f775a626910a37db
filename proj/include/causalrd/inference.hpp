#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "causalrd/cohort.hpp"
#include "causalrd/network.hpp"

namespace causalrd {

// Observed states keyed by node, at most one entry per node.
class Evidence {
 public:
  Evidence() = default;
  Evidence(std::initializer_list<std::pair<std::size_t, std::size_t>> items);

  void set(std::size_t node, std::size_t state);
  void erase(std::size_t node);
  std::optional<std::size_t> get(std::size_t node) const;
  bool contains(std::size_t node) const { return get(node).has_value(); }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

  // Checks node and state ranges (UnknownVariable / UnknownState).
  void check(const DiscreteNetwork& net) const;
  std::vector<int> dense(std::size_t width) const;

  static Evidence from_labels(const DiscreteNetwork& net,
                              const std::vector<std::pair<std::string, std::string>>& labels);
  static Evidence from_dense(std::span<const int> dense);

 private:
  std::vector<std::pair<std::size_t, std::size_t>> items_;  // sorted by node
};

struct Posterior {
  std::size_t target = 0;
  std::vector<double> probabilities;
  double operator[](std::size_t state) const { return probabilities.at(state); }
};

struct Intervention {
  std::size_t node;
  std::size_t state;
};

// Explicit elimination order; nodes outside the hidden set are ignored and
// hidden nodes not listed are appended in min-degree order.
struct EliminationOptions {
  std::span<const std::size_t> order{};
};

// Exact P(target | evidence) by variable elimination over the ancestral
// subgraph. Throws ZeroProbabilityEvidence, UnknownVariable, UnknownState.
Posterior posterior(const DiscreteNetwork& net, std::size_t target, const Evidence& evidence,
                    EliminationOptions options = {});

// posterior(mutilate(net, X), target, evidence + {X = x}).
Posterior do_posterior(const DiscreteNetwork& net, std::size_t target, Intervention intervention,
                       const Evidence& evidence);

// Product of CPT entries for a complete assignment. Throws IncompleteAssignment.
double joint_probability(const DiscreteNetwork& net, std::span<const int> assignment);

struct LogLikelihood {
  double total = 0.0;                  // -inf when any row is impossible
  std::vector<std::size_t> zero_rows;  // rows with P(observed) = 0
};

LogLikelihood marginal_log_likelihood(const DiscreteNetwork& net, const Cohort& rows);

// Unchecked fast paths on dense evidence (kMissing = unobserved), used by the
// batch kernels.
std::vector<double> posterior_dense(const DiscreteNetwork& net, std::size_t target, std::span<const int> evidence,
                                    EliminationOptions options = {});

// Joint posterior over `query` (sorted, unobserved) given evidence, laid out
// with the last query node fastest; also returns log P(evidence).
struct JointPosterior {
  std::vector<double> probabilities;
  double log_evidence = 0.0;
};
JointPosterior joint_posterior_dense(const DiscreteNetwork& net, std::span<const std::size_t> query,
                                     std::span<const int> evidence);

// log P(evidence); -inf when impossible.
double log_evidence_dense(const DiscreteNetwork& net, std::span<const int> evidence);

}  // namespace causalrd
