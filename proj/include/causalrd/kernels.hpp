#pragma once

// Hot loops of the pipeline, each with a serial reference and an OpenMP
// variant. Both variants produce bitwise-identical results: work is split
// into fixed-size chunks whose partial results are combined in chunk order,
// independent of the number of threads.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "causalrd/cohort.hpp"
#include "causalrd/network.hpp"

namespace causalrd::kernels {

inline constexpr std::size_t kRowChunk = 128;
inline constexpr std::size_t kWindowBlock = 256;

// --- batch posteriors -------------------------------------------------------

struct BatchPosterior {
  std::vector<double> probabilities;  // empty when P(evidence) = 0
  bool zero = false;
};

std::vector<BatchPosterior> posterior_batch_serial(const DiscreteNetwork& net, std::size_t target,
                                                   const std::vector<std::vector<int>>& evidence);
std::vector<BatchPosterior> posterior_batch_omp(const DiscreteNetwork& net, std::size_t target,
                                                const std::vector<std::vector<int>>& evidence, int threads);
std::vector<BatchPosterior> posterior_batch(const DiscreteNetwork& net, std::size_t target,
                                            const std::vector<std::vector<int>>& evidence, int threads);

// --- EM expected counts -----------------------------------------------------

struct ExpectedCounts {
  std::vector<std::vector<double>> tables;  // same layout as the CPTs
  double log_likelihood = 0.0;              // sum of weight * log P(observed row)
  std::vector<std::size_t> zero_rows;       // rows with P(observed) = 0
};

ExpectedCounts expected_counts_serial(const DiscreteNetwork& net, const Cohort& rows, std::span<const double> weights);
ExpectedCounts expected_counts_omp(const DiscreteNetwork& net, const Cohort& rows, std::span<const double> weights,
                                   int threads);
ExpectedCounts expected_counts(const DiscreteNetwork& net, const Cohort& rows, std::span<const double> weights,
                               int threads);

// --- window covariate tests -------------------------------------------------

// Records are given in window order (nearest to the threshold first).
struct WindowScanInput {
  std::vector<std::uint8_t> right;               // 1 when score >= threshold
  std::vector<std::vector<int>> covariates;      // [covariate][record], kMissing allowed
  std::vector<std::size_t> cardinalities;        // per covariate
  std::vector<std::size_t> ks;                   // ascending window sizes
};

// [k index][covariate] chi-squared p-value; nullopt when the table is degenerate.
using WindowPValues = std::vector<std::vector<std::optional<double>>>;

WindowPValues window_pvalues_serial(const WindowScanInput& in);
WindowPValues window_pvalues_omp(const WindowScanInput& in, int threads);
WindowPValues window_pvalues(const WindowScanInput& in, int threads);

// --- ancestral sampling -----------------------------------------------------

// Row r is drawn from its own stream seeded by (seed, first_id + r); MCAR
// masking (per-node rate, may be empty) uses the same stream after sampling.
std::vector<int> sample_rows_serial(const DiscreteNetwork& net, std::size_t n, std::uint64_t seed,
                                    std::span<const double> missing_rates, std::uint64_t first_id = 0);
std::vector<int> sample_rows_omp(const DiscreteNetwork& net, std::size_t n, std::uint64_t seed,
                                 std::span<const double> missing_rates, int threads, std::uint64_t first_id = 0);
std::vector<int> sample_rows(const DiscreteNetwork& net, std::size_t n, std::uint64_t seed,
                             std::span<const double> missing_rates, int threads, std::uint64_t first_id = 0);

}  // namespace causalrd::kernels
