#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "causalrd/cohort.hpp"
#include "causalrd/model_io.hpp"
#include "causalrd/network.hpp"
#include "causalrd/rddo.hpp"

namespace causalrd {

// Pushes a baseline covariate toward state (card - 1) right of the threshold
// and toward state 0 left of it, with probability min(1, strength * |score - threshold|).
struct ImbalanceSpec {
  std::string covariate;  // node name
  double strength = 0.0;
  int outcome_time = 1;   // scores come from the ground-truth model for this outcome
  double threshold = 0.5;
};

// Analytic facts about a generated scenario.
struct Certificate {
  double bias = 0.0;            // |associational - interventional|
  double associational = 0.0;   // P(Y = positive | X = treated)
  double interventional = 0.0;  // P(Y = positive | do(X = treated))
  std::string treatment;        // node name
  std::string treated_state;
  std::string outcome;          // node name
  std::string noise;            // node with no directed path to the outcome, if any
};

struct ScenarioSpec {
  ModelDocument model;
  std::optional<int> horizon;
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  std::map<std::string, double> missingness;  // node or base name -> MCAR rate in [0, 1)
  std::vector<std::string> hidden;            // node or base names never observed
  std::optional<ImbalanceSpec> imbalance;
  std::optional<Certificate> certificate;

  DiscreteNetwork network() const;
  // Nodes written to the cohort file (everything not hidden), in node order.
  std::vector<std::size_t> visible_nodes(const DiscreteNetwork& net) const;
};

// Ancestral sampling with per-record streams, then MCAR masking, hidden
// nodes blanked, and the imbalance injector if configured.
Cohort sample_cohort(const ScenarioSpec& spec, int threads = 1);

// Truncated factorization by full enumeration: sum over assignments with
// X = x of prod_{i != X} P(v_i | pa_i). Throws TooLargeForEnumeration past
// 20 nodes or 2^24 assignments.
std::vector<double> true_interventional_distribution(const DiscreteNetwork& net, std::size_t y, std::size_t x,
                                                     std::size_t x_state);
double true_interventional(const DiscreteNetwork& net, std::size_t y, std::size_t x, std::size_t x_state);
// P(Y = positive | X = x) by the same enumeration.
double enumerated_conditional(const DiscreteNetwork& net, std::size_t y, std::size_t x, std::size_t x_state);

// Z -> X, Z -> Y, X -> Y with |P(Y=1|X=1) - P(Y=1|do(X=1))| = bias.
// Valid bias range is [0, 0.49].
DiscreteNetwork confounded_triple(double bias);

// The triple embedded in a one-step DBN: hidden static confounder z,
// treatment x@0, outcome y@1, a noise node w@0 with no path to the outcome,
// and independent baseline covariates age@entry and sex.
ScenarioSpec make_confounded_scenario(double bias, std::size_t n, std::uint64_t seed);

void inject_imbalance(std::vector<ScoredRecord>& records, std::size_t covariate, std::size_t cardinality,
                      double threshold, double strength, std::uint64_t seed);

// Scored records with uniform scores, Bernoulli(score) labels and uniform
// categorical covariates; covariate 0 receives the imbalance injector.
struct ScoredScenario {
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  std::size_t covariates = 2;
  std::size_t categories = 3;
  double threshold = 0.5;
  double strength = 0.0;
};
std::vector<ScoredRecord> synthetic_scored_records(const ScoredScenario& scenario);

// `{"scenario": "confounded", "bias", "n", "seed"}` or an explicit spec with
// "model" (inline document or path relative to `base`).
ScenarioSpec scenario_from_json(const Json& doc, const std::filesystem::path& base = {});
Json to_json(const Certificate& cert);

}  // namespace causalrd
