#include "causalrd/rddo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "causalrd/error.hpp"
#include "causalrd/kernels.hpp"
#include "causalrd/learning.hpp"
#include "causalrd/stats.hpp"

namespace causalrd {

namespace {

// Unique evidence vectors and, per input, the index of its unique copy.
struct EvidenceSet {
  std::vector<std::vector<int>> unique;
  std::vector<std::size_t> slot;

  void add(std::vector<int> ev, std::map<std::vector<int>, std::size_t>& seen) {
    auto [it, inserted] = seen.try_emplace(ev, unique.size());
    if (inserted) unique.push_back(std::move(ev));
    slot.push_back(it->second);
  }
};

}  // namespace

ScoredCohort score_cohort(const DiscreteNetwork& net, const Cohort& rows, std::size_t outcome_node,
                          std::span<const std::size_t> covariate_nodes, int threads) {
  if (outcome_node >= net.size()) throw UnknownVariable("outcome index " + std::to_string(outcome_node));
  if (rows.width() != net.size()) throw std::invalid_argument("cohort width does not match the network");
  const int t = net.slice(outcome_node);
  const std::size_t positive = net.positive_state(outcome_node);

  EvidenceSet evidence;
  std::map<std::vector<int>, std::size_t> seen;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto row = rows.row(r);
    std::vector<int> ev(net.size(), kMissing);
    for (std::size_t i = 0; i < net.size(); ++i) {
      if (row[i] < 0 || i == outcome_node) continue;
      const int s = net.slice(i);
      if (s < t || (s == t && !net.is_outcome(i))) ev[i] = row[i];
    }
    evidence.add(std::move(ev), seen);
  }
  const auto results = kernels::posterior_batch(net, outcome_node, evidence.unique, threads);

  ScoredCohort out;
  out.records.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& res = results[evidence.slot[r]];
    if (res.zero) {
      out.failures.push_back(r);
      continue;
    }
    ScoredRecord rec;
    rec.row = r;
    rec.score = res.probabilities[positive];
    const int y = rows.at(r, outcome_node);
    rec.label = y < 0 ? kMissing : static_cast<int>(static_cast<std::size_t>(y) == positive);
    for (auto c : covariate_nodes) rec.covariates.push_back(rows.at(r, c));
    out.records.push_back(std::move(rec));
  }
  return out;
}

ScanResult scan_windows(std::span<const ScoredRecord> scored, double threshold,
                        std::span<const std::size_t> covariate_cardinalities, const ScanOptions& options) {
  if (options.k_min < 2) throw ConfigError("k_min must be at least 2");
  if (options.k_step < 1) throw ConfigError("k_step must be positive");
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  const std::size_t n = scored.size();
  if (n < options.k_min)
    throw TooFewRecords(std::to_string(n) + " scored records, window scan starts at k = " +
                        std::to_string(options.k_min));
  const std::size_t m = covariate_cardinalities.size();
  for (const auto& r : scored)
    if (r.covariates.size() != m) throw std::invalid_argument("record covariate count mismatch");

  ScanResult result;
  result.corrected_alpha = m ? stats::bonferroni_alpha(options.alpha, static_cast<int>(m)) : options.alpha;
  result.order.resize(n);
  std::iota(result.order.begin(), result.order.end(), 0);
  std::vector<double> distance(n);
  for (std::size_t i = 0; i < n; ++i) distance[i] = std::abs(scored[i].score - threshold);
  std::sort(result.order.begin(), result.order.end(), [&](auto a, auto b) {
    return distance[a] != distance[b] ? distance[a] < distance[b] : scored[a].row < scored[b].row;
  });

  kernels::WindowScanInput in;
  in.cardinalities.assign(covariate_cardinalities.begin(), covariate_cardinalities.end());
  in.covariates.assign(m, std::vector<int>(n));
  in.right.resize(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    const auto& rec = scored[result.order[pos]];
    in.right[pos] = rec.score >= threshold;
    for (std::size_t v = 0; v < m; ++v) {
      const int s = rec.covariates[v];
      if (s >= 0 && static_cast<std::size_t>(s) >= in.cardinalities[v])
        throw std::invalid_argument("covariate state out of range");
      in.covariates[v][pos] = s;
    }
  }
  const std::size_t k_last = std::min(n, options.k_max.value_or(n));
  for (std::size_t k = options.k_min; k <= k_last; k += options.k_step) in.ks.push_back(k);
  const auto pvalues = kernels::window_pvalues(in, options.threads);

  std::int64_t fp = 0, fn = 0;
  std::size_t unlabeled = 0, pos = 0;
  result.reports.reserve(in.ks.size());
  for (std::size_t i = 0; i < in.ks.size(); ++i) {
    for (; pos < in.ks[i]; ++pos) {
      const auto& rec = scored[result.order[pos]];
      if (rec.label == kMissing)
        ++unlabeled;
      else if (in.right[pos] && rec.label == 0)
        ++fp;
      else if (!in.right[pos] && rec.label == 1)
        ++fn;
    }
    WindowReport w;
    w.k = in.ks[i];
    w.threshold = threshold;
    w.pvalues = pvalues[i];
    w.randomized = std::all_of(w.pvalues.begin(), w.pvalues.end(),
                               [&](const auto& p) { return !p || *p >= result.corrected_alpha; });
    w.false_positives = fp;
    w.false_negatives = fn;
    w.power = stats::sample_power(fp, fn);
    w.unlabeled = unlabeled;
    result.reports.push_back(std::move(w));
  }
  return result;
}

std::vector<std::size_t> window_members(std::span<const ScoredRecord> scored, const ScanResult& scan, std::size_t k) {
  if (k > scan.order.size()) throw std::invalid_argument("window larger than the scored list");
  std::vector<std::size_t> rows(k);
  for (std::size_t i = 0; i < k; ++i) rows[i] = scored[scan.order[i]].row;
  return rows;
}

std::optional<std::size_t> select_window(std::span<const WindowReport> reports) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (!reports[i].randomized) continue;
    if (!best || reports[i].power > reports[*best].power ||
        (reports[i].power == reports[*best].power && reports[i].k < reports[*best].k))
      best = i;
  }
  return best;
}

std::string_view to_string(EffectMode mode) { return mode == EffectMode::Causal ? "causal" : "associational"; }

EffectMode parse_effect_mode(std::string_view text) {
  if (text == "causal") return EffectMode::Causal;
  if (text == "associational") return EffectMode::Associational;
  throw ConfigError("unknown mode '" + std::string(text) + "' (expected associational or causal)");
}

EffectTable estimate_effects(const DiscreteNetwork& net, const Cohort& rows, std::span<const std::size_t> members,
                             std::size_t x, std::size_t y, EffectMode mode, int outcome_floor, int threads) {
  if (x >= net.size() || y >= net.size()) throw UnknownVariable("effect query node out of range");
  if (rows.width() != net.size()) throw std::invalid_argument("cohort width does not match the network");
  const int sx = net.slice(x);
  if (x == y || !(sx < net.slice(y)))
    throw ConfigError("'" + net.variable(x).name + "' does not precede '" + net.variable(y).name + "'");
  if (mode == EffectMode::Causal && !has_directed_path(net, x, y))
    throw NoCausalPath("no directed path from '" + net.variable(x).name + "' to '" + net.variable(y).name + "'");

  const DiscreteNetwork model = mode == EffectMode::Causal ? mutilate(net, x) : net;
  const std::size_t positive = net.positive_state(y);

  std::vector<std::size_t> sorted(members.begin(), members.end());
  std::sort(sorted.begin(), sorted.end());

  EvidenceSet evidence;
  std::map<std::vector<int>, std::size_t> seen;
  for (auto r : sorted) {
    const auto row = rows.row(r);
    std::vector<int> ev(net.size(), kMissing);
    for (std::size_t i = 0; i < net.size(); ++i) {
      if (row[i] < 0 || i == x || net.slice(i) > sx) continue;
      if (net.is_outcome(i) && net.slice(i) >= outcome_floor) continue;
      ev[i] = row[i];
    }
    evidence.add(std::move(ev), seen);
  }

  EffectTable table;
  table.variable = net.variable(x).name;
  table.node = x;
  table.outcome = net.variable(y).name;
  table.t = net.slice(y);
  table.mode = mode;
  for (std::size_t c = 0; c < net.cardinality(x); ++c) {
    auto queries = evidence.unique;
    for (auto& q : queries) q[x] = static_cast<int>(c);
    const auto results = kernels::posterior_batch(model, y, queries, threads);

    CategoryEffect cat;
    cat.state = net.variable(x).states[c];
    for (std::size_t m = 0; m < sorted.size(); ++m) {
      const auto& res = results[evidence.slot[m]];
      if (res.zero)
        ++cat.failures;
      else
        cat.samples.push_back(res.probabilities[positive]);
    }
    cat.n = cat.samples.size();
    if (cat.n) {
      double sum = 0.0;
      for (double v : cat.samples) sum += v;
      cat.mean = sum / static_cast<double>(cat.n);
      double ss = 0.0;
      for (double v : cat.samples) ss += (v - cat.mean) * (v - cat.mean);
      cat.std = std::sqrt(ss / static_cast<double>(cat.n));
    } else {
      cat.mean = cat.std = std::numeric_limits<double>::quiet_NaN();
    }
    table.categories.push_back(std::move(cat));
  }
  return table;
}

void rank_effects(std::vector<EffectTable>& tables, double alpha) {
  for (auto& table : tables) {
    table.pairs.clear();
    table.significant = false;
    table.max_difference.reset();
    table.ks_min_p.reset();
    table.rank.reset();
    const auto& cats = table.categories;
    for (std::size_t a = 0; a < cats.size(); ++a) {
      for (std::size_t b = a + 1; b < cats.size(); ++b) {
        if (cats[a].samples.empty() || cats[b].samples.empty()) continue;
        const auto ks = stats::ks_two_sample(cats[a].samples, cats[b].samples);
        const double diff = std::abs(cats[a].mean - cats[b].mean);
        table.pairs.push_back({a, b, ks.statistic, ks.p_value, diff});
        table.ks_min_p = std::min(table.ks_min_p.value_or(1.0), ks.p_value);
        if (ks.p_value < alpha) {
          table.significant = true;
          table.max_difference = std::max(table.max_difference.value_or(0.0), diff);
        }
      }
    }
  }
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < tables.size(); ++i)
    if (tables[i].significant) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    const auto& ta = tables[a];
    const auto& tb = tables[b];
    if (ta.t != tb.t) return ta.t < tb.t;
    if (ta.mode != tb.mode) return ta.mode < tb.mode;
    if (*ta.max_difference != *tb.max_difference) return *ta.max_difference > *tb.max_difference;
    return ta.variable < tb.variable;
  });
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& cur = tables[order[i]];
    const bool same_group =
        i > 0 && tables[order[i - 1]].t == cur.t && tables[order[i - 1]].mode == cur.mode;
    tables[order[i]].rank = same_group ? *tables[order[i - 1]].rank + 1 : 1;
  }
}

namespace {

std::size_t config_node(const DiscreteNetwork& net, const std::string& name, const char* what) {
  if (auto n = net.find(name)) return *n;
  throw ConfigError(std::string(what) + " '" + name + "' is not a model node");
}

bool observed(const Cohort& rows, std::size_t node) {
  for (std::size_t r = 0; r < rows.size(); ++r)
    if (rows.at(r, node) != kMissing) return true;
  return false;
}

// The default set skips nodes never observed in the cohort (latent confounders).
std::vector<std::size_t> resolve_variables(const DiscreteNetwork& net, const std::vector<std::string>& names, int t,
                                           const Cohort& rows) {
  std::vector<std::size_t> out;
  if (names.empty()) {
    for (std::size_t i = 0; i < net.size(); ++i)
      if (net.slice(i) < t && !net.is_outcome(i) && observed(rows, i)) out.push_back(i);
    return out;
  }
  for (const auto& name : names) {
    if (auto n = net.find(name)) {
      if (net.slice(*n) < t) out.push_back(*n);
      continue;
    }
    bool any = false;
    for (std::size_t i = 0; i < net.size(); ++i) {
      if (net.node_name(i).base != name) continue;
      any = true;
      if (net.slice(i) < t) out.push_back(i);
    }
    if (!any) throw ConfigError("variable '" + name + "' is not in the model");
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

RdDoReport run_rd_do(const DiscreteNetwork& net, const Cohort& rows, const Cohort* validation,
                     const RdDoOptions& options) {
  if (options.time_points.empty()) throw ConfigError("no outcome time points requested");
  if (options.modes.empty()) throw ConfigError("no effect modes requested");
  if (rows.width() != net.size() || (validation && validation->width() != net.size()))
    throw std::invalid_argument("cohort width does not match the network");

  std::vector<std::size_t> outcome_nodes;
  for (int t : options.time_points) {
    auto node = net.outcome_node(t);
    if (!node) throw ConfigError("the model has no outcome node at t = " + std::to_string(t));
    outcome_nodes.push_back(*node);
  }
  const int outcome_floor = *std::min_element(options.time_points.begin(), options.time_points.end());
  std::vector<std::size_t> covariates, cards;
  for (const auto& name : options.covariates) {
    covariates.push_back(config_node(net, name, "covariate"));
    cards.push_back(net.cardinality(covariates.back()));
  }

  RdDoReport report;
  report.covariates = options.covariates;
  report.alpha = options.scan.alpha;
  report.corrected_alpha =
      covariates.empty() ? options.scan.alpha : stats::bonferroni_alpha(options.scan.alpha, static_cast<int>(covariates.size()));

  const bool need_youden = std::any_of(options.time_points.begin(), options.time_points.end(),
                                       [&](int t) { return !options.thresholds.contains(t); });
  Cohort split_valid, split_test;
  const Cohort* test = &rows;
  const Cohort* valid = validation;
  if (validation) {
    report.split = "given";
  } else if (need_youden) {
    const auto labels = any_outcome_labels(net, rows);
    const auto split = stratified_split(labels, {0.6, 0.2, 0.2}, options.seed);
    split_valid = rows.subset(split.valid);
    split_test = rows.subset(split.test);
    valid = &split_valid;
    test = &split_test;
    report.split = "stratified 60/20/20";
  } else {
    report.split = "none";
  }
  report.cohort_rows = test->size();
  report.validation_rows = valid ? valid->size() : 0;

  for (std::size_t ti = 0; ti < options.time_points.size(); ++ti) {
    const int t = options.time_points[ti];
    const std::size_t y = outcome_nodes[ti];
    TimePointReport tp;
    tp.t = t;
    tp.outcome = net.variable(y).name;

    if (auto it = options.thresholds.find(t); it != options.thresholds.end()) {
      tp.threshold = it->second;
      tp.threshold_source = "config";
    } else {
      const auto vs = score_cohort(net, *valid, y, {}, options.threads);
      std::vector<double> scores;
      std::vector<int> labels;
      for (const auto& r : vs.records) {
        if (r.label == kMissing) continue;
        scores.push_back(r.score);
        labels.push_back(r.label);
      }
      try {
        const auto yj = stats::youden_threshold(scores, labels);
        tp.threshold = yj.threshold;
        tp.youden_j = yj.j;
        tp.threshold_source = "youden";
      } catch (const SingleClass& e) {
        tp.status = "NoThreshold";
        tp.detail = e.what();
        report.time_points.push_back(std::move(tp));
        continue;
      }
    }

    const auto scored = score_cohort(net, *test, y, covariates, options.threads);
    tp.scored = scored.records.size();
    for (auto r : scored.failures) tp.score_failures.push_back(test->id(r));

    if (scored.records.size() < options.scan.k_min) {
      tp.status = "NoRandomWindow";
      tp.detail = "TooFewRecords: " + std::to_string(scored.records.size()) + " scored records, k_min = " +
                  std::to_string(options.scan.k_min);
      report.time_points.push_back(std::move(tp));
      continue;
    }
    auto scan_opts = options.scan;
    scan_opts.threads = options.threads;
    const auto scan = scan_windows(scored.records, tp.threshold, cards, scan_opts);
    tp.windows_scanned = scan.reports.size();
    tp.randomized_windows = static_cast<std::size_t>(
        std::count_if(scan.reports.begin(), scan.reports.end(), [](const auto& w) { return w.randomized; }));
    const auto chosen = select_window(scan.reports);
    if (!chosen) {
      tp.status = "NoRandomWindow";
      tp.detail = "no scanned window passed the covariate balance tests";
      report.time_points.push_back(std::move(tp));
      continue;
    }
    tp.status = "ok";
    tp.window = scan.reports[*chosen];
    const auto members = window_members(scored.records, scan, tp.window->k);
    for (auto r : members) tp.members.push_back(test->id(r));

    const auto vars = resolve_variables(net, options.variables, t, rows);
    for (auto mode : options.modes) {
      for (auto x : vars) {
        try {
          tp.tables.push_back(estimate_effects(net, *test, members, x, y, mode, outcome_floor, options.threads));
        } catch (const NoCausalPath& e) {
          tp.skipped.push_back({net.variable(x).name, mode, e.what()});
        }
      }
    }
    rank_effects(tp.tables, options.ks_alpha);
    report.time_points.push_back(std::move(tp));
  }

  TimePointReport* best = nullptr;
  for (auto& tp : report.time_points)
    if (tp.window && (!best || tp.window->power > best->window->power)) best = &tp;
  if (best) best->best = true;
  return report;
}

}  // namespace causalrd
