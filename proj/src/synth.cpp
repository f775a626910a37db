#include "causalrd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "causalrd/error.hpp"
#include "causalrd/kernels.hpp"
#include "causalrd/rng.hpp"

namespace causalrd {

namespace {

constexpr std::uint64_t kImbalanceStream = 0x1b873593cc9e2d51ULL;
constexpr std::size_t kMaxEnumerationNodes = 20;
constexpr double kMaxEnumerationAssignments = 16777216.0;  // 2^24

bool matches(const DiscreteNetwork& net, std::size_t node, const std::string& name) {
  return net.variable(node).name == name || net.node_name(node).base == name;
}

int perturb(int state, double score, double threshold, double strength, std::size_t cardinality, Rng& rng) {
  const double p = std::min(1.0, strength * std::abs(score - threshold));
  const double u = rng.uniform();
  if (state < 0 || !(u < p)) return state;
  return score >= threshold ? static_cast<int>(cardinality - 1) : 0;
}

void check_enumerable(const DiscreteNetwork& net) {
  if (net.size() > kMaxEnumerationNodes)
    throw TooLargeForEnumeration(std::to_string(net.size()) + " nodes; enumeration is limited to " +
                                 std::to_string(kMaxEnumerationNodes));
  double total = 1.0;
  for (std::size_t i = 0; i < net.size(); ++i) total *= static_cast<double>(net.cardinality(i));
  if (total > kMaxEnumerationAssignments)
    throw TooLargeForEnumeration("joint space of " + format_double(total) + " assignments");
}

// Calls f(assignment) for every assignment with node `fixed` at `state`.
template <class F>
void enumerate(const DiscreteNetwork& net, std::size_t fixed, std::size_t state, F&& f) {
  std::vector<int> a(net.size(), 0);
  a[fixed] = static_cast<int>(state);
  while (true) {
    f(std::as_const(a));
    std::size_t i = net.size();
    while (i-- > 0) {
      if (i == fixed) continue;
      if (static_cast<std::size_t>(++a[i]) < net.cardinality(i)) break;
      a[i] = 0;
    }
    if (i == static_cast<std::size_t>(-1)) return;
  }
}

void check_query(const DiscreteNetwork& net, std::size_t y, std::size_t x, std::size_t x_state) {
  if (y >= net.size() || x >= net.size()) throw UnknownVariable("query node out of range");
  if (x_state >= net.cardinality(x)) throw UnknownState("state " + std::to_string(x_state) + " of '" +
                                                        net.variable(x).name + "'");
  if (x == y) throw std::invalid_argument("treatment and outcome must differ");
  check_enumerable(net);
}

}  // namespace

DiscreteNetwork ScenarioSpec::network() const { return to_network(model, horizon); }

std::vector<std::size_t> ScenarioSpec::visible_nodes(const DiscreteNetwork& net) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < net.size(); ++i) {
    const bool is_hidden =
        std::any_of(hidden.begin(), hidden.end(), [&](const std::string& h) { return matches(net, i, h); });
    if (!is_hidden) out.push_back(i);
  }
  return out;
}

Cohort sample_cohort(const ScenarioSpec& spec, int threads) {
  const auto net = spec.network();
  std::vector<double> rates(net.size(), 0.0);
  for (const auto& [name, rate] : spec.missingness) {
    if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("missingness rate for '" + name + "' must lie in [0, 1)");
    bool any = false;
    for (std::size_t i = 0; i < net.size(); ++i)
      if (matches(net, i, name)) {
        rates[i] = rate;
        any = true;
      }
    if (!any) throw ConfigError("missingness names unknown variable '" + name + "'");
  }
  for (const auto& h : spec.hidden) {
    bool any = false;
    for (std::size_t i = 0; i < net.size(); ++i) any = any || matches(net, i, h);
    if (!any) throw ConfigError("hidden names unknown variable '" + h + "'");
  }

  const auto values = kernels::sample_rows(net, spec.n, spec.seed, rates, threads);
  const auto visible = spec.visible_nodes(net);
  std::vector<bool> shown(net.size(), false);
  for (auto v : visible) shown[v] = true;

  Cohort cohort(net.size());
  std::vector<int> row(net.size());
  for (std::size_t r = 0; r < spec.n; ++r) {
    for (std::size_t i = 0; i < net.size(); ++i) row[i] = shown[i] ? values[r * net.size() + i] : kMissing;
    cohort.add_row(row);
  }

  if (spec.imbalance) {
    const auto& imb = *spec.imbalance;
    const auto y = net.outcome_node(imb.outcome_time);
    if (!y) throw ConfigError("imbalance: no outcome node at t = " + std::to_string(imb.outcome_time));
    const auto cov = net.find(imb.covariate);
    if (!cov) throw ConfigError("imbalance: unknown covariate '" + imb.covariate + "'");
    const auto scored = score_cohort(net, cohort, *y, {}, threads);
    for (const auto& rec : scored.records) {
      Rng rng(mix_seed(spec.seed ^ kImbalanceStream, rec.row));
      auto cells = cohort.row(rec.row);
      cells[*cov] = perturb(cells[*cov], rec.score, imb.threshold, imb.strength, net.cardinality(*cov), rng);
    }
  }
  return cohort;
}

std::vector<double> true_interventional_distribution(const DiscreteNetwork& net, std::size_t y, std::size_t x,
                                                     std::size_t x_state) {
  check_query(net, y, x, x_state);
  std::vector<double> dist(net.cardinality(y), 0.0);
  enumerate(net, x, x_state, [&](const std::vector<int>& a) {
    double p = 1.0;
    for (std::size_t i = 0; i < net.size() && p != 0.0; ++i)
      if (i != x) p *= net.probability(i, net.row_index(i, a), static_cast<std::size_t>(a[i]));
    dist[static_cast<std::size_t>(a[y])] += p;
  });
  return dist;
}

double true_interventional(const DiscreteNetwork& net, std::size_t y, std::size_t x, std::size_t x_state) {
  return true_interventional_distribution(net, y, x, x_state)[net.positive_state(y)];
}

double enumerated_conditional(const DiscreteNetwork& net, std::size_t y, std::size_t x, std::size_t x_state) {
  check_query(net, y, x, x_state);
  const std::size_t positive = net.positive_state(y);
  double num = 0.0, den = 0.0;
  enumerate(net, x, x_state, [&](const std::vector<int>& a) {
    double p = 1.0;
    for (std::size_t i = 0; i < net.size() && p != 0.0; ++i)
      p *= net.probability(i, net.row_index(i, a), static_cast<std::size_t>(a[i]));
    den += p;
    if (static_cast<std::size_t>(a[y]) == positive) num += p;
  });
  if (!(den > 0.0)) throw ZeroProbabilityEvidence("P(" + net.variable(x).name + ") = 0 for the requested state");
  return num / den;
}

namespace {

// P(X=1|Z=0) = a, P(X=1|Z=1) = 1 - a, P(Y=1|X=1,Z) = 0.5 -/+ d, so that
// P(Y=1|X=1) - P(Y=1|do(X=1)) = d (1 - 2a) while the latter stays 0.5.
struct TripleParams {
  double a;
  double d;
};

TripleParams triple_params(double bias) {
  if (!(bias >= 0.0 && bias <= 0.49)) throw std::invalid_argument("bias must lie in [0, 0.49]");
  if (bias <= 0.2) return {(0.2 - bias) / 0.4, 0.2};
  return {0.01, bias / 0.98};
}

std::vector<double> x_table(const TripleParams& p) { return {1 - p.a, p.a, p.a, 1 - p.a}; }

// Parents (x, z): rows x0z0, x0z1, x1z0, x1z1.
std::vector<double> y_table(const TripleParams& p) {
  return {0.9, 0.1, 0.5, 0.5, 0.5 + p.d, 0.5 - p.d, 0.5 - p.d, 0.5 + p.d};
}

VariableDef binary(std::string name, VariableKind kind) { return {std::move(name), {"0", "1"}, kind, {}}; }

}  // namespace

DiscreteNetwork confounded_triple(double bias) {
  const auto p = triple_params(bias);
  std::vector<VariableDef> vars{binary("z", VariableKind::Static), binary("x", VariableKind::Static),
                                binary("y", VariableKind::Static)};
  std::vector<Cpt> cpts{{{}, {0.5, 0.5}}, {{0}, x_table(p)}, {{1, 0}, y_table(p)}};
  return DiscreteNetwork(std::move(vars), std::move(cpts), Outcome{"y", "1"});
}

ScenarioSpec make_confounded_scenario(double bias, std::size_t n, std::uint64_t seed) {
  const auto p = triple_params(bias);
  DbnTemplate tpl;
  tpl.variables = {binary("z", VariableKind::Static),
                   {"sex", {"f", "m"}, VariableKind::Static, {}},
                   {"age", {"young", "middle", "old"}, VariableKind::Entry, {}},
                   binary("x", VariableKind::PerSlice),
                   binary("w", VariableKind::PerSlice),
                   binary("y", VariableKind::PerSlice)};
  tpl.static_arcs = {{"z", "x", {}}, {"z", "y", {1}}};
  tpl.inter_arcs = {{"x", "y"}};
  tpl.cpts = {{"z", {{}, {0.5, 0.5}}},
              {"sex", {{}, {0.5, 0.5}}},
              {"age@entry", {{}, {0.3, 0.4, 0.3}}},
              {"x@0", {{"z"}, x_table(p)}},
              {"x@t", {{"z"}, x_table(p)}},
              {"w@0", {{}, {0.6, 0.4}}},
              {"w@t", {{}, {0.6, 0.4}}},
              {"y@0", {{}, {0.7, 0.3}}},
              {"y@t", {{"x@t-1", "z"}, y_table(p)}}};
  tpl.outcome = Outcome{"y", "1"};
  tpl.horizon = 1;

  ScenarioSpec spec;
  spec.model = tpl;
  spec.horizon = 1;
  spec.n = n;
  spec.seed = seed;
  spec.hidden = {"z"};
  spec.certificate = Certificate{p.d * (1 - 2 * p.a), 0.5 + p.d * (1 - 2 * p.a), 0.5, "x@0", "1", "y@1", "w@0"};
  return spec;
}

void inject_imbalance(std::vector<ScoredRecord>& records, std::size_t covariate, std::size_t cardinality,
                      double threshold, double strength, std::uint64_t seed) {
  if (!(strength >= 0.0)) throw std::invalid_argument("imbalance strength must be nonnegative");
  for (auto& rec : records) {
    Rng rng(mix_seed(seed ^ kImbalanceStream, rec.row));
    auto& cell = rec.covariates.at(covariate);
    cell = perturb(cell, rec.score, threshold, strength, cardinality, rng);
  }
}

std::vector<ScoredRecord> synthetic_scored_records(const ScoredScenario& s) {
  if (s.categories < 2) throw std::invalid_argument("covariates need at least two categories");
  std::vector<ScoredRecord> out(s.n);
  for (std::size_t i = 0; i < s.n; ++i) {
    Rng rng(mix_seed(s.seed, i));
    auto& rec = out[i];
    rec.row = i;
    rec.score = rng.uniform();
    rec.label = rng.uniform() < rec.score ? 1 : 0;
    for (std::size_t c = 0; c < s.covariates; ++c) rec.covariates.push_back(static_cast<int>(rng.below(s.categories)));
  }
  if (s.strength > 0.0 && s.covariates > 0) inject_imbalance(out, 0, s.categories, s.threshold, s.strength, s.seed);
  return out;
}

ScenarioSpec scenario_from_json(const Json& doc, const std::filesystem::path& base) {
  try {
    ScenarioSpec spec;
    const auto n = doc.value("n", std::size_t{1000});
    const auto seed = doc.value("seed", std::uint64_t{0});
    if (doc.value("scenario", std::string()) == "confounded") {
      spec = make_confounded_scenario(doc.value("bias", 0.12), n, seed);
    } else if (doc.contains("scenario")) {
      throw ConfigError("unknown scenario '" + doc.at("scenario").get<std::string>() + "'");
    } else {
      if (!doc.contains("model")) throw ConfigError("scenario needs \"model\" or \"scenario\"");
      const auto& m = doc.at("model");
      spec.model = m.is_string() ? load_model(base / m.get<std::string>()) : model_from_json(m);
      spec.n = n;
      spec.seed = seed;
    }
    if (doc.contains("horizon")) spec.horizon = doc.at("horizon").get<int>();
    if (doc.contains("missingness")) spec.missingness = doc.at("missingness").get<std::map<std::string, double>>();
    if (doc.contains("hidden")) spec.hidden = doc.at("hidden").get<std::vector<std::string>>();
    if (doc.contains("imbalance")) {
      const auto& j = doc.at("imbalance");
      ImbalanceSpec imb;
      imb.covariate = j.at("covariate").get<std::string>();
      imb.strength = j.value("strength", 0.0);
      imb.outcome_time = j.value("outcome_time", 1);
      imb.threshold = j.value("threshold", 0.5);
      spec.imbalance = imb;
    }
    if (spec.n < 1) throw ConfigError("scenario n must be at least 1");
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad scenario: ") + e.what());
  }
}

Json to_json(const Certificate& c) {
  Json j = Json::object();
  j["bias"] = c.bias;
  j["associational"] = c.associational;
  j["interventional"] = c.interventional;
  j["treatment"] = c.treatment;
  j["treated_state"] = c.treated_state;
  j["outcome"] = c.outcome;
  j["noise"] = c.noise;
  return j;
}

}  // namespace causalrd
