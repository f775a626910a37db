#include "causalrd/error.hpp"
#include "causalrd/inference.hpp"
#include "causalrd/synth.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace causalrd;

TEST_SUITE("inference") {
  TEST_CASE("variable elimination matches full-joint enumeration") {
    Rng rng(2024);
    int checked = 0;
    for (int trial = 0; trial < 150; ++trial) {
      const auto net = oracle::random_network(rng, {2, 9, 3, 3, trial % 3 == 0 ? 0.3 : 0.0});
      const std::size_t target = rng.below(net.size());
      const auto ev = oracle::random_evidence(rng, net, target, 0.4);
      const auto expect = oracle::enumerate_posterior(net, target, ev);
      if (expect.empty()) {
        CHECK_THROWS_AS(posterior(net, target, oracle::to_evidence(ev)), ZeroProbabilityEvidence);
        continue;
      }
      const auto got = posterior(net, target, oracle::to_evidence(ev));
      CHECK(oracle::max_abs_diff(got.probabilities, expect) < 1e-12);
      ++checked;
    }
    CHECK(checked > 100);
  }

  TEST_CASE("elimination order does not change the answer") {
    Rng rng(9);
    for (int trial = 0; trial < 40; ++trial) {
      const auto net = oracle::random_network(rng, {4, 8, 3, 3});
      const std::size_t target = net.size() - 1;
      std::vector<std::size_t> order(net.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      rng.shuffle(order);
      const auto a = posterior(net, target, {});
      const auto b = posterior(net, target, {}, {order});
      CHECK(oracle::max_abs_diff(a.probabilities, b.probabilities) < 1e-12);
    }
  }

  TEST_CASE("do-posterior is the truncated factorization") {
    Rng rng(77);
    for (int trial = 0; trial < 60; ++trial) {
      const auto net = oracle::random_network(rng, {3, 8, 3, 3});
      const std::size_t x = rng.below(net.size() - 1);
      const std::size_t y = x + 1 + rng.below(net.size() - x - 1);
      const std::size_t xs = rng.below(net.cardinality(x));
      const std::vector<int> none(net.size(), -1);
      const auto got = do_posterior(net, y, {x, xs}, {});
      CHECK(oracle::max_abs_diff(got.probabilities, oracle::enumerate_do(net, y, x, xs, none)) < 1e-12);
      CHECK(oracle::max_abs_diff(got.probabilities, true_interventional_distribution(net, y, x, xs)) < 1e-12);
    }
  }

  TEST_CASE("mutilation removes incoming arcs only") {
    const auto net = confounded_triple(0.12);
    const auto x = net.index_of("x");
    const auto m = mutilate(net, x);
    CHECK(m.parents(x).empty());
    CHECK(m.parents(net.index_of("y")).size() == 2);
    CHECK(m.cpt(net.index_of("z")) == net.cpt(net.index_of("z")));
  }

  TEST_CASE("confounded triple separates seeing from doing") {
    const auto net = confounded_triple(0.12);
    const auto x = net.index_of("x"), y = net.index_of("y");
    const auto one = net.state_of(x, "1");
    Evidence ev;
    ev.set(x, one);
    CHECK(posterior(net, y, ev)[1] == doctest::Approx(0.62).epsilon(1e-12));
    CHECK(do_posterior(net, y, {x, one}, {})[1] == doctest::Approx(0.5).epsilon(1e-12));
  }

  TEST_CASE("impossible evidence and bad names are reported") {
    std::vector<VariableDef> vars{{"a", {"0", "1"}}, {"b", {"0", "1"}}};
    std::vector<Cpt> cpts{{{}, {1.0, 0.0}}, {{0}, {0.5, 0.5, 0.5, 0.5}}};
    const DiscreteNetwork net(vars, cpts);
    CHECK_THROWS_AS(posterior(net, 1, Evidence{{0, 1}}), ZeroProbabilityEvidence);
    CHECK(std::isinf(log_evidence_dense(net, std::vector<int>{1, -1})));
    CHECK_THROWS_AS(Evidence::from_labels(net, {{"c", "0"}}), UnknownVariable);
    CHECK_THROWS_AS(Evidence::from_labels(net, {{"a", "2"}}), UnknownState);
  }

  TEST_CASE("joint posterior and evidence likelihood agree with enumeration") {
    Rng rng(41);
    for (int trial = 0; trial < 40; ++trial) {
      const auto net = oracle::random_network(rng, {3, 7, 3, 2});
      auto ev = oracle::random_evidence(rng, net, net.size(), 0.3);
      ev[0] = -1;
      ev[1] = -1;
      const std::size_t q[] = {0, 1};
      const auto jp = joint_posterior_dense(net, q, ev);
      double z = 0.0;
      std::vector<double> expect(net.cardinality(0) * net.cardinality(1), 0.0);
      oracle::for_each_assignment(net, [&](const std::vector<int>& a) {
        for (std::size_t i = 0; i < net.size(); ++i)
          if (ev[i] >= 0 && ev[i] != a[i]) return;
        const double p = oracle::joint(net, a);
        z += p;
        expect[a[0] * net.cardinality(1) + a[1]] += p;
      });
      for (auto& e : expect) e /= z;
      CHECK(oracle::max_abs_diff(jp.probabilities, expect) < 1e-12);
      CHECK(jp.log_evidence == doctest::Approx(std::log(z)).epsilon(1e-10));
      CHECK(log_evidence_dense(net, ev) == doctest::Approx(std::log(z)).epsilon(1e-10));
    }
  }
}
