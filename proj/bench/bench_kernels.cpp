#include <benchmark/benchmark.h>

#include "causalrd/kernels.hpp"
#include "causalrd/rddo.hpp"
#include "causalrd/synth.hpp"

using namespace causalrd;
using namespace causalrd::kernels;

namespace {

struct Fixture {
  DiscreteNetwork net;
  Cohort rows;
  std::vector<std::vector<int>> evidence;
  std::size_t target = 0;
  WindowScanInput scan;

  Fixture() {
    auto spec = make_confounded_scenario(0.12, 20000, 1);
    spec.missingness["w"] = 0.3;
    net = spec.network();
    rows = sample_cohort(spec);
    target = net.index_of("y@1");
    for (std::size_t r = 0; r < rows.size(); ++r) {
      std::vector<int> ev(rows.row(r).begin(), rows.row(r).end());
      ev[target] = kMissing;
      evidence.push_back(std::move(ev));
    }
    const auto recs = synthetic_scored_records({20000, 3, 3, 3, 0.5, 0.5});
    scan.cardinalities = {3, 3, 3};
    scan.covariates.assign(3, {});
    for (const auto& r : recs) {
      scan.right.push_back(r.score >= 0.5);
      for (int c = 0; c < 3; ++c) scan.covariates[c].push_back(r.covariates[c]);
    }
    for (std::size_t k = 200; k <= recs.size(); k += 20) scan.ks.push_back(k);
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_PosteriorBatch(benchmark::State& state) {
  const auto& f = fixture();
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto out = threads == 0 ? posterior_batch_serial(f.net, f.target, f.evidence)
                            : posterior_batch_omp(f.net, f.target, f.evidence, threads);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.evidence.size()));
}

void BM_ExpectedCounts(benchmark::State& state) {
  const auto& f = fixture();
  const int threads = static_cast<int>(state.range(0));
  const std::vector<double> w(f.rows.size(), 1.0);
  for (auto _ : state) {
    auto out = threads == 0 ? expected_counts_serial(f.net, f.rows, w) : expected_counts_omp(f.net, f.rows, w, threads);
    benchmark::DoNotOptimize(out.log_likelihood);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.rows.size()));
}

void BM_WindowPValues(benchmark::State& state) {
  const auto& f = fixture();
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto out = threads == 0 ? window_pvalues_serial(f.scan) : window_pvalues_omp(f.scan, threads);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.scan.ks.size()));
}

void BM_SampleRows(benchmark::State& state) {
  const auto& f = fixture();
  const int threads = static_cast<int>(state.range(0));
  const std::vector<double> none;
  for (auto _ : state) {
    auto out = threads == 0 ? sample_rows_serial(f.net, 20000, 7, none) : sample_rows_omp(f.net, 20000, 7, none, threads);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * 20000);
}

// Argument 0 is the serial reference; others are OpenMP thread counts.
BENCHMARK(BM_PosteriorBatch)->Arg(0)->Arg(1)->Arg(2)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExpectedCounts)->Arg(0)->Arg(1)->Arg(2)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WindowPValues)->Arg(0)->Arg(1)->Arg(2)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SampleRows)->Arg(0)->Arg(1)->Arg(2)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
