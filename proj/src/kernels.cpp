#include "causalrd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <omp.h>

#include "causalrd/inference.hpp"
#include "causalrd/rng.hpp"
#include "causalrd/stats.hpp"

namespace causalrd::kernels {

// --- batch posteriors -------------------------------------------------------

namespace {

BatchPosterior one_posterior(const DiscreteNetwork& net, std::size_t target, std::span<const int> evidence) {
  const std::size_t query[] = {target};
  auto jp = joint_posterior_dense(net, query, evidence);
  if (std::isinf(jp.log_evidence)) return {{}, true};
  return {std::move(jp.probabilities), false};
}

}  // namespace

std::vector<BatchPosterior> posterior_batch_serial(const DiscreteNetwork& net, std::size_t target,
                                                   const std::vector<std::vector<int>>& evidence) {
  std::vector<BatchPosterior> out(evidence.size());
  for (std::size_t i = 0; i < evidence.size(); ++i) out[i] = one_posterior(net, target, evidence[i]);
  return out;
}

std::vector<BatchPosterior> posterior_batch_omp(const DiscreteNetwork& net, std::size_t target,
                                                const std::vector<std::vector<int>>& evidence, int threads) {
  std::vector<BatchPosterior> out(evidence.size());
  const auto n = static_cast<std::ptrdiff_t>(evidence.size());
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = one_posterior(net, target, evidence[i]);
  return out;
}

std::vector<BatchPosterior> posterior_batch(const DiscreteNetwork& net, std::size_t target,
                                            const std::vector<std::vector<int>>& evidence, int threads) {
  if (threads > 1) return posterior_batch_omp(net, target, evidence, threads);
  return posterior_batch_serial(net, target, evidence);
}

// --- EM expected counts -----------------------------------------------------

namespace {

ExpectedCounts empty_counts(const DiscreteNetwork& net) {
  ExpectedCounts c;
  c.tables.resize(net.size());
  for (std::size_t i = 0; i < net.size(); ++i) c.tables[i].assign(net.cpt(i).table.size(), 0.0);
  return c;
}

void accumulate_row(const DiscreteNetwork& net, std::span<const int> row, double weight, std::size_t row_id,
                    ExpectedCounts& acc) {
  const double lp = log_evidence_dense(net, row);
  if (std::isinf(lp)) {
    acc.zero_rows.push_back(row_id);
    return;
  }
  acc.log_likelihood += weight * lp;

  std::vector<int> assignment(row.begin(), row.end());
  std::vector<std::size_t> hidden;
  for (std::size_t i = 0; i < net.size(); ++i) {
    const std::size_t card = net.cardinality(i);
    hidden.clear();
    if (row[i] < 0) hidden.push_back(i);
    for (auto p : net.parents(i))
      if (row[p] < 0) hidden.push_back(p);
    if (hidden.empty()) {
      acc.tables[i][net.row_index(i, row) * card + static_cast<std::size_t>(row[i])] += weight;
      continue;
    }
    std::sort(hidden.begin(), hidden.end());
    const auto jp = joint_posterior_dense(net, hidden, row);
    // Walk the joint table (last hidden node fastest) with an odometer.
    std::vector<std::size_t> digits(hidden.size(), 0);
    for (double p : jp.probabilities) {
      for (std::size_t h = 0; h < hidden.size(); ++h) assignment[hidden[h]] = static_cast<int>(digits[h]);
      if (p != 0.0)
        acc.tables[i][net.row_index(i, assignment) * card + static_cast<std::size_t>(assignment[i])] += weight * p;
      for (std::size_t h = hidden.size(); h-- > 0;) {
        if (++digits[h] < net.cardinality(hidden[h])) break;
        digits[h] = 0;
      }
    }
    for (auto h : hidden) assignment[h] = kMissing;
  }
}

ExpectedCounts chunk_counts(const DiscreteNetwork& net, const Cohort& rows, std::span<const double> weights,
                            std::size_t begin, std::size_t end) {
  auto acc = empty_counts(net);
  for (std::size_t r = begin; r < end; ++r) accumulate_row(net, rows.row(r), weights[r], r, acc);
  return acc;
}

void merge_into(ExpectedCounts& total, const ExpectedCounts& part) {
  for (std::size_t i = 0; i < total.tables.size(); ++i)
    for (std::size_t j = 0; j < total.tables[i].size(); ++j) total.tables[i][j] += part.tables[i][j];
  total.log_likelihood += part.log_likelihood;
  total.zero_rows.insert(total.zero_rows.end(), part.zero_rows.begin(), part.zero_rows.end());
}

void check_inputs(const DiscreteNetwork& net, const Cohort& rows, std::span<const double> weights) {
  if (rows.width() != net.size()) throw std::invalid_argument("cohort width does not match the network");
  if (weights.size() != rows.size()) throw std::invalid_argument("one weight per row expected");
}

}  // namespace

ExpectedCounts expected_counts_serial(const DiscreteNetwork& net, const Cohort& rows, std::span<const double> weights) {
  check_inputs(net, rows, weights);
  auto total = empty_counts(net);
  for (std::size_t begin = 0; begin < rows.size(); begin += kRowChunk)
    merge_into(total, chunk_counts(net, rows, weights, begin, std::min(rows.size(), begin + kRowChunk)));
  return total;
}

ExpectedCounts expected_counts_omp(const DiscreteNetwork& net, const Cohort& rows, std::span<const double> weights,
                                   int threads) {
  check_inputs(net, rows, weights);
  const std::size_t chunks = (rows.size() + kRowChunk - 1) / kRowChunk;
  std::vector<ExpectedCounts> parts(chunks);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * kRowChunk;
    parts[c] = chunk_counts(net, rows, weights, begin, std::min(rows.size(), begin + kRowChunk));
  }
  auto total = empty_counts(net);
  for (const auto& p : parts) merge_into(total, p);
  return total;
}

ExpectedCounts expected_counts(const DiscreteNetwork& net, const Cohort& rows, std::span<const double> weights,
                               int threads) {
  if (threads > 1) return expected_counts_omp(net, rows, weights, threads);
  return expected_counts_serial(net, rows, weights);
}

// --- window covariate tests -------------------------------------------------

namespace {

struct SideCounts {
  std::vector<std::vector<std::int64_t>> left, right;

  explicit SideCounts(const WindowScanInput& in) {
    for (auto c : in.cardinalities) {
      left.emplace_back(c, 0);
      right.emplace_back(c, 0);
    }
  }
  void add(const WindowScanInput& in, std::size_t record) {
    for (std::size_t v = 0; v < in.covariates.size(); ++v) {
      const int s = in.covariates[v][record];
      if (s < 0) continue;
      (in.right[record] ? right : left)[v][static_cast<std::size_t>(s)] += 1;
    }
  }
  std::vector<std::optional<double>> pvalues() const {
    std::vector<std::optional<double>> out(left.size());
    for (std::size_t v = 0; v < left.size(); ++v)
      if (auto r = stats::try_chi2_homogeneity(left[v], right[v])) out[v] = r->p_value;
    return out;
  }
};

void check_scan(const WindowScanInput& in) {
  if (in.covariates.size() != in.cardinalities.size())
    throw std::invalid_argument("one cardinality per covariate expected");
  for (const auto& c : in.covariates)
    if (c.size() != in.right.size()) throw std::invalid_argument("covariate column length mismatch");
  for (std::size_t i = 0; i < in.ks.size(); ++i) {
    if (in.ks[i] > in.right.size()) throw std::invalid_argument("window larger than the record list");
    if (i && in.ks[i] <= in.ks[i - 1]) throw std::invalid_argument("window sizes must ascend");
  }
}

void scan_block(const WindowScanInput& in, std::size_t first, std::size_t last, WindowPValues& out) {
  SideCounts counts(in);
  std::size_t pos = 0;
  for (std::size_t i = first; i < last; ++i) {
    for (; pos < in.ks[i]; ++pos) counts.add(in, pos);
    out[i] = counts.pvalues();
  }
}

}  // namespace

WindowPValues window_pvalues_serial(const WindowScanInput& in) {
  check_scan(in);
  WindowPValues out(in.ks.size());
  scan_block(in, 0, in.ks.size(), out);
  return out;
}

WindowPValues window_pvalues_omp(const WindowScanInput& in, int threads) {
  check_scan(in);
  WindowPValues out(in.ks.size());
  const std::size_t blocks = (in.ks.size() + kWindowBlock - 1) / kWindowBlock;
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
    const std::size_t first = static_cast<std::size_t>(b) * kWindowBlock;
    scan_block(in, first, std::min(in.ks.size(), first + kWindowBlock), out);
  }
  return out;
}

WindowPValues window_pvalues(const WindowScanInput& in, int threads) {
  if (threads > 1) return window_pvalues_omp(in, threads);
  return window_pvalues_serial(in);
}

// --- ancestral sampling -----------------------------------------------------

namespace {

void sample_one(const DiscreteNetwork& net, std::span<const std::size_t> order, std::span<const double> missing_rates,
                std::uint64_t seed, std::uint64_t id, std::span<int> out) {
  Rng rng(mix_seed(seed, id));
  for (auto node : order) {
    const std::size_t card = net.cardinality(node);
    const std::size_t row = net.row_index(node, out);
    const double u = rng.uniform();
    double cum = 0.0;
    int pick = -1, last_positive = 0;
    for (std::size_t s = 0; s < card; ++s) {
      const double p = net.probability(node, row, s);
      if (p > 0.0) last_positive = static_cast<int>(s);
      cum += p;
      if (pick < 0 && u < cum) pick = static_cast<int>(s);
    }
    out[node] = pick < 0 ? last_positive : pick;
  }
  if (missing_rates.empty()) return;
  for (std::size_t i = 0; i < net.size(); ++i) {
    const double u = rng.uniform();
    if (u < missing_rates[i]) out[i] = kMissing;
  }
}

void check_rates(const DiscreteNetwork& net, std::span<const double> missing_rates) {
  if (!missing_rates.empty() && missing_rates.size() != net.size())
    throw std::invalid_argument("one missingness rate per node expected");
}

}  // namespace

std::vector<int> sample_rows_serial(const DiscreteNetwork& net, std::size_t n, std::uint64_t seed,
                                    std::span<const double> missing_rates, std::uint64_t first_id) {
  check_rates(net, missing_rates);
  const auto order = topological_order(net);
  const std::size_t w = net.size();
  std::vector<int> out(n * w, kMissing);
  for (std::size_t r = 0; r < n; ++r)
    sample_one(net, order, missing_rates, seed, first_id + r, std::span<int>(out.data() + r * w, w));
  return out;
}

std::vector<int> sample_rows_omp(const DiscreteNetwork& net, std::size_t n, std::uint64_t seed,
                                 std::span<const double> missing_rates, int threads, std::uint64_t first_id) {
  check_rates(net, missing_rates);
  const auto order = topological_order(net);
  const std::size_t w = net.size();
  std::vector<int> out(n * w, kMissing);
#pragma omp parallel for schedule(static) num_threads(threads)
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(n); ++r)
    sample_one(net, order, missing_rates, seed, first_id + static_cast<std::uint64_t>(r),
               std::span<int>(out.data() + r * w, w));
  return out;
}

std::vector<int> sample_rows(const DiscreteNetwork& net, std::size_t n, std::uint64_t seed,
                             std::span<const double> missing_rates, int threads, std::uint64_t first_id) {
  if (threads > 1) return sample_rows_omp(net, n, seed, missing_rates, threads, first_id);
  return sample_rows_serial(net, n, seed, missing_rates, first_id);
}

}  // namespace causalrd::kernels
