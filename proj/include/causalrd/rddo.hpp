#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "causalrd/cohort.hpp"
#include "causalrd/network.hpp"

namespace causalrd {

struct ScoredRecord {
  std::size_t row = 0;          // cohort ordinal; doubles as the record id for tie-breaking
  double score = 0.0;           // P(outcome positive | record evidence)
  int label = kMissing;         // 1 / 0 observed outcome, kMissing if unobserved
  std::vector<int> covariates;  // baseline covariate states, kMissing allowed
};

struct ScoredCohort {
  std::vector<ScoredRecord> records;
  std::vector<std::size_t> failures;  // rows whose evidence has zero probability
};

// Scores every row for the outcome node at time t, with evidence = all
// observations at slices < t plus non-outcome observations at slice t.
ScoredCohort score_cohort(const DiscreteNetwork& net, const Cohort& rows, std::size_t outcome_node,
                          std::span<const std::size_t> covariate_nodes, int threads = 1);

struct ScanOptions {
  double alpha = 0.05;  // family level; each covariate is tested at alpha / #covariates
  std::size_t k_min = 200;
  std::size_t k_step = 1;
  std::optional<std::size_t> k_max;
  int threads = 1;
};

struct WindowReport {
  std::size_t k = 0;
  double threshold = 0.0;
  std::vector<std::optional<double>> pvalues;  // per covariate; nullopt = skipped (degenerate table)
  bool randomized = false;
  double power = 0.0;
  std::int64_t false_positives = 0;
  std::int64_t false_negatives = 0;
  std::size_t unlabeled = 0;  // window members without an observed outcome
};

struct ScanResult {
  std::vector<std::size_t> order;  // positions into the scored list, nearest to the threshold first
  std::vector<WindowReport> reports;
  double corrected_alpha = 0.0;
};

// One report per k in k_min, k_min + k_step, ... up to min(N, k_max).
// Window k holds the k records nearest the threshold, ties by ascending row.
// Throws TooFewRecords.
ScanResult scan_windows(std::span<const ScoredRecord> scored, double threshold,
                        std::span<const std::size_t> covariate_cardinalities, const ScanOptions& options = {});

// Rows of the window's members, in window order.
std::vector<std::size_t> window_members(std::span<const ScoredRecord> scored, const ScanResult& scan, std::size_t k);

// Index of the randomized report with the highest power, smallest k on ties.
std::optional<std::size_t> select_window(std::span<const WindowReport> reports);

enum class EffectMode { Associational, Causal };
std::string_view to_string(EffectMode mode);
EffectMode parse_effect_mode(std::string_view text);

struct CategoryEffect {
  std::string state;
  std::size_t n = 0;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  std::size_t failures = 0;  // records whose query had zero-probability evidence
  std::vector<double> samples;  // per-record effects, ascending row order
};

struct PairTest {
  std::size_t a = 0, b = 0;  // category indices
  double statistic = 0.0;
  double p_value = 1.0;
  double mean_difference = 0.0;  // |mean_a - mean_b|
};

struct EffectTable {
  std::string variable;  // node name of X
  std::size_t node = 0;
  std::string outcome;  // node name of Y
  int t = 0;
  EffectMode mode = EffectMode::Associational;
  std::vector<CategoryEffect> categories;
  std::vector<PairTest> pairs;
  bool significant = false;
  std::optional<double> max_difference;  // over significant pairs
  std::optional<double> ks_min_p;
  std::optional<int> rank;
};

// Per-record effects of each category of x on P(y = positive). Evidence is
// the record's observations at slices <= slice(x), minus x itself and minus
// outcome nodes at slices >= outcome_floor. Throws NoCausalPath (causal
// mode), ConfigError when x does not precede y.
EffectTable estimate_effects(const DiscreteNetwork& net, const Cohort& rows, std::span<const std::size_t> members,
                             std::size_t x, std::size_t y, EffectMode mode, int outcome_floor, int threads = 1);

// Pairwise KS tests per table; significant tables are ranked by their largest
// significant mean difference within each (t, mode) group.
void rank_effects(std::vector<EffectTable>& tables, double alpha = 0.05);

struct RdDoOptions {
  std::vector<int> time_points;          // outcome slices to analyse
  std::vector<std::string> covariates;   // baseline covariate node names
  std::map<int, double> thresholds;      // explicit thresholds; others come from Youden
  std::vector<std::string> variables;    // node or base names; empty = every non-outcome node before t
  std::vector<EffectMode> modes{EffectMode::Associational, EffectMode::Causal};
  ScanOptions scan;
  double ks_alpha = 0.05;
  std::uint64_t seed = 0;  // for the split when no validation cohort is given
  int threads = 1;
};

struct VariableSkip {
  std::string variable;
  EffectMode mode;
  std::string reason;
};

struct TimePointReport {
  int t = 0;
  std::string outcome;
  double threshold = 0.0;
  std::string threshold_source;  // "config" or "youden"
  double youden_j = 0.0;
  std::string status;  // ok, NoRandomWindow, TooFewRecords, NoThreshold
  std::string detail;
  std::size_t scored = 0;
  std::vector<std::string> score_failures;  // record ids
  std::size_t windows_scanned = 0;
  std::size_t randomized_windows = 0;
  std::optional<WindowReport> window;
  std::vector<std::string> members;  // record ids, window order
  std::vector<EffectTable> tables;
  std::vector<VariableSkip> skipped;
  bool best = false;  // selected window with the highest power across time points
};

struct RdDoReport {
  std::vector<std::string> covariates;
  double alpha = 0.05;
  double corrected_alpha = 0.05;
  std::size_t cohort_rows = 0;
  std::size_t validation_rows = 0;
  std::string split;  // "given" or "stratified 60/20/20"
  std::vector<TimePointReport> time_points;
};

// Full pipeline. Without a validation cohort, `rows` is split 60/20/20 on
// "any outcome positive"; Youden thresholds come from the validation part and
// windows from the test part.
RdDoReport run_rd_do(const DiscreteNetwork& net, const Cohort& rows, const Cohort* validation,
                     const RdDoOptions& options);

}  // namespace causalrd
