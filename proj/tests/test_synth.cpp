#include <cmath>

#include "causalrd/error.hpp"
#include "causalrd/inference.hpp"
#include "causalrd/synth.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace causalrd;

TEST_SUITE("synth") {
  TEST_CASE("confounded triple hits the requested bias across the range") {
    for (double bias : {0.0, 0.05, 0.12, 0.2, 0.3, 0.49}) {
      const auto net = confounded_triple(bias);
      const auto x = net.index_of("x"), y = net.index_of("y");
      const double seen = enumerated_conditional(net, y, x, 1);
      const double done = true_interventional(net, y, x, 1);
      CHECK(std::abs(seen - done) == doctest::Approx(bias).epsilon(1e-12));
      CHECK(done == doctest::Approx(0.5).epsilon(1e-12));
    }
    CHECK_THROWS_AS(confounded_triple(0.5), std::invalid_argument);
    CHECK_THROWS_AS(confounded_triple(-0.1), std::invalid_argument);
  }

  TEST_CASE("scenario certificate agrees with enumeration on the unrolled model") {
    const auto spec = make_confounded_scenario(0.12, 100, 1);
    REQUIRE(spec.certificate);
    const auto& c = *spec.certificate;
    const auto net = spec.network();
    const auto x = net.index_of(c.treatment), y = net.index_of(c.outcome);
    const auto xs = net.state_of(x, c.treated_state);
    CHECK(enumerated_conditional(net, y, x, xs) == doctest::Approx(c.associational).epsilon(1e-12));
    CHECK(true_interventional(net, y, x, xs) == doctest::Approx(c.interventional).epsilon(1e-12));
    CHECK_FALSE(has_directed_path(net, net.index_of(c.noise), y));
    CHECK(spec.visible_nodes(net).size() == net.size() - 1);
  }

  TEST_CASE("sampling is reproducible and respects hidden and missing nodes") {
    auto spec = make_confounded_scenario(0.12, 5000, 3);
    spec.missingness["w"] = 0.25;
    const auto net = spec.network();
    const auto a = sample_cohort(spec, 1);
    const auto b = sample_cohort(spec, 4);
    REQUIRE(a.size() == 5000);
    std::size_t miss = 0;
    for (std::size_t r = 0; r < a.size(); ++r) {
      CHECK(std::equal(a.row(r).begin(), a.row(r).end(), b.row(r).begin()));
      CHECK(a.at(r, net.index_of("z")) == kMissing);
      miss += a.at(r, net.index_of("w@1")) == kMissing;
    }
    CHECK(std::abs(miss / 5000.0 - 0.25) < 0.03);
    spec.missingness["nope"] = 0.1;
    CHECK_THROWS_AS(sample_cohort(spec), ConfigError);
  }

  TEST_CASE("enumeration refuses oversized networks") {
    Rng rng(1);
    const auto net = oracle::random_network(rng, {21, 21, 2, 1});
    CHECK_THROWS_AS(true_interventional(net, 20, 0, 0), TooLargeForEnumeration);
  }

  TEST_CASE("imbalance injector pushes covariates apart with distance") {
    auto flat = synthetic_scored_records({20000, 1, 2, 3, 0.5, 0.0});
    auto pushed = synthetic_scored_records({20000, 1, 2, 3, 0.5, 2.0});
    double far_right = 0, n_far = 0;
    for (std::size_t i = 0; i < flat.size(); ++i) {
      CHECK(flat[i].score == pushed[i].score);
      if (pushed[i].score > 0.9) {
        n_far += 1;
        far_right += pushed[i].covariates[0] == 2;
      }
      if (std::abs(pushed[i].score - 0.5) < 1e-3) CHECK(pushed[i].covariates[0] >= 0);
    }
    CHECK(far_right / n_far > 0.85);
  }

  TEST_CASE("scenario JSON forms") {
    const auto s = scenario_from_json(Json::parse(R"({"scenario":"confounded","bias":0.1,"n":50,"seed":9})"));
    CHECK(s.n == 50);
    CHECK(s.seed == 9);
    CHECK(s.certificate->bias == doctest::Approx(0.1));
    CHECK_THROWS_AS(scenario_from_json(Json::parse(R"({"scenario":"other"})")), ConfigError);
  }
}
