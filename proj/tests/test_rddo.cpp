#include <algorithm>
#include <cmath>

#include "causalrd/error.hpp"
#include "causalrd/inference.hpp"
#include "causalrd/kernels.hpp"
#include "causalrd/rddo.hpp"
#include "causalrd/stats.hpp"
#include "causalrd/synth.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace causalrd;

namespace {

Cohort as_cohort(const std::vector<int>& flat, std::size_t width) {
  Cohort c(width);
  for (std::size_t r = 0; r * width < flat.size(); ++r) c.add_row(std::span<const int>(flat).subspan(r * width, width));
  return c;
}

EffectTable table_with(std::string name, int t, EffectMode mode, std::vector<std::vector<double>> samples) {
  EffectTable tab;
  tab.variable = std::move(name);
  tab.t = t;
  tab.mode = mode;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CategoryEffect c;
    c.state = std::to_string(i);
    c.samples = samples[i];
    c.n = samples[i].size();
    double m = 0;
    for (double x : samples[i]) m += x;
    c.mean = m / static_cast<double>(c.n);
    tab.categories.push_back(c);
  }
  return tab;
}

}  // namespace

TEST_SUITE("rddo") {
  TEST_CASE("windows follow distance to the threshold and match direct tests") {
    auto recs = synthetic_scored_records({900, 21, 2, 3, 0.4, 0.0});
    for (std::size_t i = 0; i < recs.size(); i += 5) recs[i].label = kMissing;
    for (std::size_t i = 0; i < 40; ++i) recs[i].score = recs[i + 40].score;  // exact distance ties
    const std::size_t card[] = {3, 3};
    ScanOptions opts;
    opts.k_min = 50;
    opts.k_step = 37;
    const auto scan = scan_windows(recs, 0.4, card, opts);
    CHECK(scan.corrected_alpha == doctest::Approx(0.025));

    std::vector<std::size_t> ref(recs.size());
    std::iota(ref.begin(), ref.end(), std::size_t{0});
    std::sort(ref.begin(), ref.end(), [&](std::size_t a, std::size_t b) {
      const double da = std::abs(recs[a].score - 0.4), db = std::abs(recs[b].score - 0.4);
      return da != db ? da < db : recs[a].row < recs[b].row;
    });
    CHECK(scan.order == ref);

    for (const auto& w : scan.reports) {
      std::int64_t fp = 0, fn = 0;
      for (int v = 0; v < 2; ++v) {
        std::vector<std::int64_t> left(3, 0), right(3, 0);
        for (std::size_t i = 0; i < w.k; ++i) {
          const auto& r = recs[ref[i]];
          if (r.covariates[v] >= 0) ++(r.score >= 0.4 ? right : left)[r.covariates[v]];
        }
        const auto t = stats::try_chi2_homogeneity(left, right);
        REQUIRE(t.has_value() == w.pvalues[v].has_value());
        if (t) CHECK(*w.pvalues[v] == doctest::Approx(t->p_value).epsilon(1e-12));
      }
      for (std::size_t i = 0; i < w.k; ++i) {
        const auto& r = recs[ref[i]];
        if (r.label == 0 && r.score >= 0.4) ++fp;
        if (r.label == 1 && r.score < 0.4) ++fn;
      }
      CHECK(w.false_positives == fp);
      CHECK(w.false_negatives == fn);
      CHECK(w.power == stats::sample_power(fp, fn));
    }
    CHECK(scan.reports.back().k <= recs.size());
    const auto members = window_members(recs, scan, 50);
    CHECK(members.size() == 50);
    CHECK(members[0] == recs[ref[0]].row);

    ScanOptions big;
    big.k_min = 5000;
    CHECK_THROWS_AS(scan_windows(recs, 0.4, card, big), TooFewRecords);
    big.k_min = 1;
    CHECK_THROWS_AS(scan_windows(recs, 0.4, card, big), ConfigError);
  }

  TEST_CASE("window selection prefers power, then the smaller window") {
    std::vector<WindowReport> r(4);
    r[0] = {200, 0.5, {}, true, 0.6};
    r[1] = {201, 0.5, {}, false, 0.9};
    r[2] = {202, 0.5, {}, true, 0.8};
    r[3] = {203, 0.5, {}, true, 0.8};
    CHECK(select_window(r) == 2u);
    for (auto& w : r) w.randomized = false;
    CHECK_FALSE(select_window(r));
  }

  TEST_CASE("per-record effects are the exact posteriors and do-queries") {
    auto spec = make_confounded_scenario(0.12, 300, 5);
    spec.hidden.clear();
    const auto net = spec.network();
    const auto rows = sample_cohort(spec);
    const auto x = net.index_of("x@0"), y = net.index_of("y@1"), w = net.index_of("w@0");
    std::vector<std::size_t> members{4, 0, 9, 17, 33};
    const auto causal = estimate_effects(net, rows, members, x, y, EffectMode::Causal, 1);
    const auto assoc = estimate_effects(net, rows, members, x, y, EffectMode::Associational, 1);
    REQUIRE(causal.categories.size() == 2);
    std::vector<std::size_t> sorted = members;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t s = 0; s < 2; ++s) {
      for (std::size_t i = 0; i < sorted.size(); ++i) {
        std::vector<int> ev(net.size(), -1);
        for (std::size_t v = 0; v < net.size(); ++v)
          if (net.slice(v) <= 0 && v != x) ev[v] = rows.at(sorted[i], v);
        ev[net.index_of("z")] = rows.at(sorted[i], net.index_of("z"));
        ev[x] = static_cast<int>(s);
        const auto p_assoc = oracle::enumerate_posterior(net, y, ev);
        ev[x] = -1;
        const auto p_do = oracle::enumerate_do(net, y, x, s, ev);
        CHECK(assoc.categories[s].samples[i] == doctest::Approx(p_assoc[1]).epsilon(1e-12));
        CHECK(causal.categories[s].samples[i] == doctest::Approx(p_do[1]).epsilon(1e-12));
      }
    }
    CHECK_THROWS_AS(estimate_effects(net, rows, members, w, y, EffectMode::Causal, 1), NoCausalPath);
    CHECK_NOTHROW(estimate_effects(net, rows, members, w, y, EffectMode::Associational, 1));
    CHECK_THROWS_AS(estimate_effects(net, rows, members, y, x, EffectMode::Associational, 1), ConfigError);
  }

  TEST_CASE("ranking orders significant tables by their largest difference") {
    std::vector<double> lo(30, 0.1), mid(30, 0.4), hi(30, 0.9);
    std::vector<EffectTable> tabs{table_with("a", 1, EffectMode::Causal, {lo, mid}),
                                  table_with("b", 1, EffectMode::Causal, {lo, hi}),
                                  table_with("c", 1, EffectMode::Causal, {lo, lo}),
                                  table_with("d", 1, EffectMode::Associational, {lo, mid})};
    rank_effects(tabs, 0.05);
    CHECK(tabs[1].rank == 1);
    CHECK(tabs[0].rank == 2);
    CHECK_FALSE(tabs[2].rank);
    CHECK_FALSE(tabs[2].significant);
    CHECK(tabs[3].rank == 1);
    CHECK(*tabs[1].max_difference == doctest::Approx(0.8));
  }

  TEST_CASE("pipeline reports per time point status") {
    const auto spec = make_confounded_scenario(0.12, 3000, 2);
    const auto net = spec.network();
    const auto rows = sample_cohort(spec);
    RdDoOptions o;
    o.time_points = {1};
    o.covariates = {"sex", "age@entry"};
    o.scan.k_min = 100;
    o.seed = 4;
    auto rep = run_rd_do(net, rows, nullptr, o);
    REQUIRE(rep.time_points.size() == 1);
    CHECK(rep.split == "stratified 60/20/20");
    CHECK(rep.corrected_alpha == doctest::Approx(0.025));
    const auto& tp = rep.time_points[0];
    CHECK(tp.threshold_source == "youden");
    if (tp.status == "ok") {
      CHECK(tp.best);
      CHECK(tp.members.size() == tp.window->k);
    }

    o.thresholds[1] = 0.45;
    o.scan.k_min = 100000;
    rep = run_rd_do(net, rows, nullptr, o);
    CHECK(rep.split == "none");
    CHECK(rep.time_points[0].status == "NoRandomWindow");
    CHECK(rep.time_points[0].detail.rfind("TooFewRecords", 0) == 0);
  }
}
