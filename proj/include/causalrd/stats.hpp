#pragma once

#include <cstdint>
#include <optional>
#include <span>

namespace causalrd::stats {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double dof = 0.0;  // degrees of freedom (chi2) or effective sample size (KS)
};

// Pearson chi-squared homogeneity test on the 2 x C table [left; right].
// Empty categories are dropped, then categories whose expected count is
// below 5 in either group are pooled into one "other" category. Returns
// nullopt when fewer than 2 categories (or an empty group) remain.
std::optional<TestResult> try_chi2_homogeneity(std::span<const std::int64_t> left,
                                               std::span<const std::int64_t> right);
// Same, throwing DegenerateTable instead of returning nullopt.
TestResult chi2_homogeneity(std::span<const std::int64_t> left, std::span<const std::int64_t> right);

double chi2_survival(double statistic, double dof);

// Two-sample Kolmogorov-Smirnov with the asymptotic Kolmogorov p-value at
// effective n = |a||b| / (|a| + |b|). Throws EmptySample.
TestResult ks_two_sample(std::span<const double> a, std::span<const double> b);

// Q_KS(lambda) = 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 lambda^2).
double kolmogorov_survival(double lambda);

double bonferroni_alpha(double alpha, int tests);

struct YoudenResult {
  double threshold = 0.0;  // classify positive when score >= threshold
  double j = 0.0;
};

// Maximizes sensitivity + specificity - 1 over midpoints between distinct
// sorted scores plus the -inf / +inf sentinels; ties go to the larger
// threshold. Throws SingleClass.
YoudenResult youden_threshold(std::span<const double> scores, std::span<const int> labels);

// 1 - fp / (fn + fp); 1 when both are zero.
double sample_power(std::int64_t false_positives, std::int64_t false_negatives);

}  // namespace causalrd::stats
