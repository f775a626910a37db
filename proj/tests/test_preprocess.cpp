#include <cmath>
#include <functional>

#include "causalrd/error.hpp"
#include "causalrd/preprocess.hpp"
#include "causalrd/rng.hpp"
#include "causalrd/synth.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace causalrd;

namespace {

// Quadratic reference: every midpoint between distinct values is a candidate.
std::vector<double> reference_mdlp(std::vector<std::pair<double, int>> pts) {
  std::sort(pts.begin(), pts.end());
  std::vector<double> cuts;
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t lo, std::size_t hi) {
    const double n = static_cast<double>(hi - lo);
    double pos = 0;
    for (std::size_t i = lo; i < hi; ++i) pos += pts[i].second;
    const double h = oracle::entropy2(pos, n);
    if (hi - lo < 2 || h == 0.0) return;
    std::size_t best = 0;
    double best_e = 1e300;
    for (std::size_t i = lo + 1; i < hi; ++i) {
      if (pts[i].first == pts[i - 1].first) continue;
      double p1 = 0;
      for (std::size_t j = lo; j < i; ++j) p1 += pts[j].second;
      const double n1 = static_cast<double>(i - lo);
      const double e = (n1 * oracle::entropy2(p1, n1) + (n - n1) * oracle::entropy2(pos - p1, n - n1)) / n;
      if (e < best_e - 1e-12) {
        best_e = e;
        best = i;
      }
    }
    if (best == 0) return;
    double p1 = 0;
    for (std::size_t j = lo; j < best; ++j) p1 += pts[j].second;
    const double n1 = static_cast<double>(best - lo), n2 = n - n1, p2 = pos - p1;
    auto k = [](double p, double m) { return (p > 0 ? 1 : 0) + (p < m ? 1 : 0); };
    const double h1 = oracle::entropy2(p1, n1), h2 = oracle::entropy2(p2, n2);
    const double delta = std::log2(std::pow(3.0, k(pos, n)) - 2) - (k(pos, n) * h - k(p1, n1) * h1 - k(p2, n2) * h2);
    if (!(h - best_e > (std::log2(n - 1) + delta) / n)) return;
    rec(lo, best);
    cuts.push_back((pts[best - 1].first + pts[best].first) / 2);
    rec(best, hi);
  };
  rec(0, pts.size());
  return cuts;
}

}  // namespace

TEST_SUITE("preprocess") {
  TEST_CASE("six-point hand case gives the single middle cut") {
    const std::vector<double> v{1, 2, 3, 10, 11, 12};
    const std::vector<int> l{0, 0, 0, 1, 1, 1};
    const auto s = mdlp_cuts(v, l, "egfr");
    REQUIRE(s.cuts == std::vector<double>{6.5});
    // gain 1 bit against (log2(5) + log2(7) - 2) / 6
    const double threshold = (std::log2(5.0) + std::log2(7.0) - 2.0) / 6.0;
    CHECK(1.0 > threshold);
    CHECK(s.states == std::vector<std::string>{"<6.5", ">=6.5"});
  }

  TEST_CASE("pure labels give no cuts") {
    const std::vector<double> v{1, 2, 3, 4, 5};
    CHECK(mdlp_cuts(v, std::vector<int>{1, 1, 1, 1, 1}).cuts.empty());
    CHECK(mdlp_cuts(v, std::vector<int>{0, 0, 0, 0, 0}).states == std::vector<std::string>{"all"});
  }

  TEST_CASE("MDLP agrees with the quadratic reference") {
    Rng rng(123);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = 4 + rng.below(60);
      std::vector<double> v(n);
      std::vector<int> l(n);
      std::vector<std::pair<double, int>> pts;
      for (std::size_t i = 0; i < n; ++i) {
        v[i] = rng.uniform() * 100.0;
        l[i] = rng.uniform() < (v[i] < 40 ? 0.1 : v[i] < 70 ? 0.5 : 0.9);
        pts.emplace_back(v[i], l[i]);
      }
      CHECK(mdlp_cuts(v, l).cuts == reference_mdlp(pts));
    }
  }

  TEST_CASE("bins are half-open with the cut going right") {
    const auto s = make_scheme("x", {1.0, 2.0});
    CHECK(apply_bins(0.5, s) == 0u);
    CHECK(apply_bins(1.0, s) == 1u);
    CHECK(apply_bins(2.0, s) == 2u);
    CHECK_FALSE(apply_bins(std::nullopt, s));
    CHECK_THROWS_AS(apply_bins(std::nan(""), s), NonFiniteValue);
    CHECK(s.states == std::vector<std::string>{"<1", "1..2", ">=2"});
    const auto back = scheme_from_json(to_json(s));
    CHECK(back.cuts == s.cuts);
    CHECK(back.states == s.states);
  }

  TEST_CASE("plausibility filtering blanks and logs out-of-range cells") {
    const auto t = parse_csv("id,egfr@0,egfr@1,sex\na,50,900,f\nb,,-3,m\n", "mem");
    const std::vector<PlausibilityRange> ranges{{"egfr", 0, 200}};
    const auto r = apply_plausibility(t, ranges);
    REQUIRE(r.changes.size() == 2);
    CHECK(r.changes[0].row == 0);
    CHECK(r.changes[0].column == "egfr@1");
    CHECK(r.changes[0].original == 900);
    CHECK(r.table.rows[0][2].empty());
    CHECK(r.table.rows[0][1] == "50");
    CHECK_THROWS_AS(apply_plausibility(t, std::vector<PlausibilityRange>{{"bmi", 0, 1}}), ConfigError);
    CHECK_THROWS_AS(apply_plausibility(t, std::vector<PlausibilityRange>{{"egfr", 5, 1}}), ConfigError);
    const auto bad = parse_csv("egfr@0\nabc\n", "mem");
    CHECK_THROWS_AS(apply_plausibility(bad, ranges), CohortFormatError);
  }

  TEST_CASE("applying a scheme rewrites states and resets parameters") {
    const auto spec = make_confounded_scenario(0.1, 10, 1);
    const auto s = make_scheme("w", {0.5});
    const auto doc = apply_scheme(spec.model, s);
    const auto& tpl = std::get<DbnTemplate>(doc);
    CHECK(tpl.find("w")->states == s.states);
    CHECK(tpl.cpts.empty());

    const auto net = spec.network();
    const auto net2 = std::get<DiscreteNetwork>(apply_scheme(ModelDocument(net), make_scheme("w", {0.5, 1.5})));
    const auto w0 = net2.index_of("w@0");
    CHECK(net2.cardinality(w0) == 3);
    CHECK(net2.cpt(w0).table == std::vector<double>(3, 1.0 / 3.0));
    CHECK(net2.cpt(net2.index_of("y@1")) == net.cpt(net.index_of("y@1")));
    CHECK_THROWS_AS(binned_variable(net.variable(w0), make_scheme("w", {})), InvalidModel);
  }
}
