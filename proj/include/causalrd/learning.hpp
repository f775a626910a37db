#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "causalrd/cohort.hpp"
#include "causalrd/network.hpp"

namespace causalrd {

// CPT entries (count + alpha) / (row_total + alpha * cardinality) from
// complete rows. Throws IncompleteAssignment on a missing cell and
// EmptyParentConfiguration when alpha = 0 leaves a row without data.
DiscreteNetwork mle_fit(const DiscreteNetwork& structure, const Cohort& rows, double alpha = 1.0);

// CPTs from (expected) counts laid out like the tables.
DiscreteNetwork fit_from_counts(const DiscreteNetwork& structure, const std::vector<std::vector<double>>& counts,
                                double alpha);

enum class EmInit { Uniform, Random };

struct EmOptions {
  EmInit init = EmInit::Uniform;
  std::uint64_t seed = 0;  // for EmInit::Random
  int max_iter = 200;
  double tol = 1e-6;       // on the largest absolute parameter change
  double alpha = 1.0;
  int threads = 1;
};

struct FitReport {
  int iterations = 0;
  // Entry i is evaluated at the parameters after i M-steps (entry 0: init).
  std::vector<double> log_likelihood;
  // log_likelihood + alpha * sum(log theta): the quantity smoothed EM
  // increases monotonically. Equal to log_likelihood when alpha = 0.
  std::vector<double> objective;
  bool converged = false;
  double final_delta = 0.0;
  std::size_t unique_rows = 0;
};

struct EmResult {
  DiscreteNetwork network;
  FitReport report;
};

// Identical rows are merged and weighted. Throws NonFiniteLikelihood when a
// row has zero probability under the current parameters.
EmResult em_fit(const DiscreteNetwork& structure, const Cohort& rows, const EmOptions& options = {});

// 1 where the row's node equals `positive_state`, else 0 (missing counts as 0).
std::vector<int> node_labels(const Cohort& rows, std::size_t node, std::size_t positive_state);
// 1 where any outcome node of the network is observed positive.
std::vector<int> any_outcome_labels(const DiscreteNetwork& net, const Cohort& rows);

struct Split {
  std::vector<std::size_t> train, valid, test;  // ascending row indices
};

// Per-class shuffle and largest-remainder allocation, so each fold's
// positive count is within one of exact stratification. Throws
// InsufficientPositives when positives exist but a fold would get none.
Split stratified_split(std::span<const int> labels, std::array<double, 3> fractions, std::uint64_t seed);

// All positives plus an equal-size random subset of negatives (all negatives
// when they are fewer), as ascending row indices. Throws EmptyClass.
std::vector<std::size_t> undersample(std::span<const int> labels, std::uint64_t seed);

}  // namespace causalrd
