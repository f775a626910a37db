#include "causalrd/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "causalrd/error.hpp"

namespace causalrd::stats {

namespace {
constexpr double kMinExpected = 5.0;
}

std::optional<TestResult> try_chi2_homogeneity(std::span<const std::int64_t> left,
                                               std::span<const std::int64_t> right) {
  if (left.size() != right.size()) throw std::invalid_argument("chi2: category counts differ in length");

  std::vector<std::pair<double, double>> cols;
  for (std::size_t c = 0; c < left.size(); ++c) {
    if (left[c] < 0 || right[c] < 0) throw std::invalid_argument("chi2: negative count");
    if (left[c] + right[c] > 0) cols.emplace_back(static_cast<double>(left[c]), static_cast<double>(right[c]));
  }
  double nl = 0.0, nr = 0.0;
  for (const auto& [l, r] : cols) {
    nl += l;
    nr += r;
  }
  if (cols.size() < 2 || nl == 0.0 || nr == 0.0) return std::nullopt;
  const double n = nl + nr;

  std::vector<std::pair<double, double>> kept;
  std::pair<double, double> other{0.0, 0.0};
  bool pooled = false;
  for (const auto& col : cols) {
    const double total = col.first + col.second;
    if (nl * total / n < kMinExpected || nr * total / n < kMinExpected) {
      other.first += col.first;
      other.second += col.second;
      pooled = true;
    } else {
      kept.push_back(col);
    }
  }
  if (pooled) kept.push_back(other);
  if (kept.size() < 2) return std::nullopt;

  double stat = 0.0;
  for (const auto& [l, r] : kept) {
    const double total = l + r;
    const double el = nl * total / n;
    const double er = nr * total / n;
    stat += (l - el) * (l - el) / el + (r - er) * (r - er) / er;
  }
  const double dof = static_cast<double>(kept.size() - 1);
  return TestResult{stat, chi2_survival(stat, dof), dof};
}

TestResult chi2_homogeneity(std::span<const std::int64_t> left, std::span<const std::int64_t> right) {
  if (auto r = try_chi2_homogeneity(left, right)) return *r;
  throw DegenerateTable("fewer than 2 usable categories in the 2 x C table");
}

double chi2_survival(double statistic, double dof) {
  if (!(statistic > 0.0)) return 1.0;
  if (std::isinf(statistic)) return 0.0;
  return boost::math::gamma_q(dof / 2.0, statistic / 2.0);
}

double kolmogorov_survival(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  if (lambda < 1.18) {
    // Small-lambda form: CDF = sqrt(2 pi)/lambda * sum exp(-(2k-1)^2 pi^2 / (8 lambda^2)).
    const double w = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double cdf = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double term = std::exp(-static_cast<double>((2 * k - 1) * (2 * k - 1)) * w);
      cdf += term;
      if (term < 1e-17 * cdf) break;
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double q = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    q += sign * term;
    sign = -sign;
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * q, 0.0, 1.0);
}

TestResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw EmptySample("KS test needs at least one value per sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size());
  const double nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  // Once one sample is exhausted the gap only shrinks toward 0.
  const double en = na * nb / (na + nb);
  const double root = std::sqrt(en);
  const double lambda = (root + 0.12 + 0.11 / root) * d;
  return TestResult{d, d == 0.0 ? 1.0 : kolmogorov_survival(lambda), en};
}

double bonferroni_alpha(double alpha, int tests) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
  if (tests < 1) throw std::invalid_argument("number of tests must be positive");
  return alpha / tests;
}

YoudenResult youden_threshold(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto l, auto r) { return scores[l] < scores[r]; });
  double pos = 0.0, neg = 0.0;
  for (int l : labels) (l ? pos : neg) += 1.0;
  if (pos == 0.0 || neg == 0.0) throw SingleClass("Youden threshold needs both classes");

  constexpr double kInf = std::numeric_limits<double>::infinity();
  // At -inf everything is positive.
  double tp = pos, fp = neg;
  YoudenResult best{-kInf, tp / pos - fp / neg};
  std::size_t i = 0;
  while (i < order.size()) {
    const double v = scores[order[i]];
    while (i < order.size() && scores[order[i]] == v) {
      (labels[order[i]] ? tp : fp) -= 1.0;
      ++i;
    }
    const double threshold = i < order.size() ? (v + scores[order[i]]) / 2.0 : kInf;
    const double j = tp / pos - fp / neg;
    if (j >= best.j) best = {threshold, j};
  }
  return best;
}

double sample_power(std::int64_t false_positives, std::int64_t false_negatives) {
  if (false_positives < 0 || false_negatives < 0) throw std::invalid_argument("negative confusion count");
  if (false_positives + false_negatives == 0) return 1.0;
  return 1.0 - static_cast<double>(false_positives) / static_cast<double>(false_negatives + false_positives);
}

}  // namespace causalrd::stats
