#include <cstring>

#include "causalrd/kernels.hpp"
#include "causalrd/synth.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace causalrd;
using namespace causalrd::kernels;

namespace {

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("batch posterior: OpenMP equals serial bitwise") {
    Rng rng(1);
    const auto net = oracle::random_network(rng, {8, 10, 3, 3, 0.2});
    std::vector<std::vector<int>> ev;
    for (int i = 0; i < 700; ++i) ev.push_back(oracle::random_evidence(rng, net, net.size() - 1, 0.5));
    const auto ref = posterior_batch_serial(net, net.size() - 1, ev);
    for (int threads : {1, 2, 3, 8}) {
      const auto got = posterior_batch_omp(net, net.size() - 1, ev, threads);
      REQUIRE(got.size() == ref.size());
      for (std::size_t i = 0; i < ref.size(); ++i) {
        CHECK(got[i].zero == ref[i].zero);
        CHECK(same_bits(got[i].probabilities, ref[i].probabilities));
      }
    }
  }

  TEST_CASE("expected counts: OpenMP equals serial bitwise") {
    Rng rng(2);
    const auto net = oracle::random_network(rng, {6, 8, 3, 3});
    const auto flat = sample_rows_serial(net, 1000, 5, std::vector<double>(net.size(), 0.3));
    Cohort rows(net.size());
    for (std::size_t r = 0; r < 1000; ++r) rows.add_row(std::span<const int>(flat).subspan(r * net.size(), net.size()));
    std::vector<double> w(rows.size());
    for (auto& x : w) x = 1.0 + rng.below(3);
    const auto ref = expected_counts_serial(net, rows, w);
    for (int threads : {2, 5}) {
      const auto got = expected_counts_omp(net, rows, w, threads);
      CHECK(std::memcmp(&got.log_likelihood, &ref.log_likelihood, sizeof(double)) == 0);
      for (std::size_t i = 0; i < net.size(); ++i) CHECK(same_bits(got.tables[i], ref.tables[i]));
    }
  }

  TEST_CASE("window p-values: OpenMP equals serial") {
    auto recs = synthetic_scored_records({3000, 4, 3, 3, 0.5, 0.8});
    WindowScanInput in;
    in.cardinalities = {3, 3, 3};
    in.covariates.assign(3, {});
    for (const auto& r : recs) {
      in.right.push_back(r.score >= 0.5);
      for (int c = 0; c < 3; ++c) in.covariates[c].push_back(r.covariates[c]);
    }
    for (std::size_t k = 200; k <= recs.size(); k += 7) in.ks.push_back(k);
    const auto ref = window_pvalues_serial(in);
    for (int threads : {2, 4}) CHECK(window_pvalues_omp(in, threads) == ref);
  }

  TEST_CASE("ancestral sampling: OpenMP equals serial and marginals converge") {
    const auto net = confounded_triple(0.2);
    const std::vector<double> none;
    const auto ref = sample_rows_serial(net, 20000, 9, none);
    CHECK(sample_rows_omp(net, 20000, 9, none, 4) == ref);
    CHECK(sample_rows_serial(net, 100, 9, none, 19900) ==
          std::vector<int>(ref.end() - 100 * 3, ref.end()));
    double y1 = 0;
    for (std::size_t r = 0; r < 20000; ++r) y1 += ref[r * 3 + net.index_of("y")] == 1;
    const auto exact = posterior(net, net.index_of("y"), {})[1];
    CHECK(std::abs(y1 / 20000 - exact) < 0.02);
  }
}
