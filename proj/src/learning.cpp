#include "causalrd/learning.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "causalrd/error.hpp"
#include "causalrd/kernels.hpp"
#include "causalrd/rng.hpp"

namespace causalrd {

DiscreteNetwork fit_from_counts(const DiscreteNetwork& structure, const std::vector<std::vector<double>>& counts,
                                double alpha) {
  if (!(alpha >= 0.0) || std::isinf(alpha)) throw std::invalid_argument("alpha must be finite and >= 0");
  std::vector<std::vector<double>> tables(structure.size());
  for (std::size_t i = 0; i < structure.size(); ++i) {
    const std::size_t card = structure.cardinality(i);
    const auto& c = counts.at(i);
    auto& t = tables[i];
    t.resize(c.size());
    for (std::size_t row = 0; row * card < c.size(); ++row) {
      double total = 0.0;
      for (std::size_t s = 0; s < card; ++s) total += c[row * card + s];
      const double denom = total + alpha * static_cast<double>(card);
      if (!(denom > 0.0))
        throw EmptyParentConfiguration("'" + structure.variable(i).name + "' row " + std::to_string(row) +
                                       " has no data and alpha = 0");
      for (std::size_t s = 0; s < card; ++s) t[row * card + s] = (c[row * card + s] + alpha) / denom;
    }
  }
  return structure.with_tables(std::move(tables));
}

DiscreteNetwork mle_fit(const DiscreteNetwork& structure, const Cohort& rows, double alpha) {
  if (rows.width() != structure.size()) throw std::invalid_argument("cohort width does not match the network");
  std::vector<std::vector<double>> counts(structure.size());
  for (std::size_t i = 0; i < structure.size(); ++i) counts[i].assign(structure.cpt(i).table.size(), 0.0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto row = rows.row(r);
    for (std::size_t i = 0; i < structure.size(); ++i) {
      if (row[i] < 0)
        throw IncompleteAssignment("row " + std::to_string(r) + " misses '" + structure.variable(i).name + "'");
      counts[i][structure.row_index(i, row) * structure.cardinality(i) + static_cast<std::size_t>(row[i])] += 1.0;
    }
  }
  return fit_from_counts(structure, counts, alpha);
}

namespace {

double log_prior(const DiscreteNetwork& net, double alpha) {
  if (alpha == 0.0) return 0.0;
  double s = 0.0;
  for (const auto& cpt : net.cpts())
    for (double p : cpt.table) s += std::log(p);
  return alpha * s;
}

double max_delta(const DiscreteNetwork& a, const DiscreteNetwork& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a.cpt(i).table;
    const auto& y = b.cpt(i).table;
    for (std::size_t j = 0; j < x.size(); ++j) d = std::max(d, std::abs(x[j] - y[j]));
  }
  return d;
}

DiscreteNetwork random_init(const DiscreteNetwork& structure, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> tables(structure.size());
  for (std::size_t i = 0; i < structure.size(); ++i) {
    const std::size_t card = structure.cardinality(i);
    auto& t = tables[i];
    t.resize(structure.cpt(i).table.size());
    for (std::size_t row = 0; row * card < t.size(); ++row) {
      // Flat Dirichlet draw via normalized exponentials.
      double total = 0.0;
      for (std::size_t s = 0; s < card; ++s) {
        double u = rng.uniform();
        while (u <= 0.0) u = rng.uniform();
        t[row * card + s] = -std::log(u);
        total += t[row * card + s];
      }
      for (std::size_t s = 0; s < card; ++s) t[row * card + s] /= total;
    }
  }
  return structure.with_tables(std::move(tables));
}

DiscreteNetwork uniform_init(const DiscreteNetwork& structure) {
  std::vector<std::vector<double>> tables;
  for (std::size_t i = 0; i < structure.size(); ++i) {
    const auto parents = structure.parents(i);
    tables.push_back(uniform_cpt(structure.variables(), i, {parents.begin(), parents.end()}).table);
  }
  return structure.with_tables(std::move(tables));
}

struct Deduped {
  Cohort rows;
  std::vector<double> weights;
  std::vector<std::size_t> first_index;
  bool any_missing = false;
};

Deduped dedupe(const Cohort& rows) {
  std::map<std::vector<int>, std::pair<double, std::size_t>> seen;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto row = rows.row(r);
    auto [it, inserted] = seen.try_emplace(std::vector<int>(row.begin(), row.end()), 0.0, r);
    it->second.first += 1.0;
  }
  Deduped out{Cohort(rows.width()), {}, {}, false};
  for (const auto& [values, wf] : seen) {
    out.rows.add_row(values);
    out.weights.push_back(wf.first);
    out.first_index.push_back(wf.second);
    out.any_missing = out.any_missing || std::find(values.begin(), values.end(), kMissing) != values.end();
  }
  return out;
}

}  // namespace

EmResult em_fit(const DiscreteNetwork& structure, const Cohort& rows, const EmOptions& options) {
  if (rows.width() != structure.size()) throw std::invalid_argument("cohort width does not match the network");
  if (rows.size() == 0) throw std::invalid_argument("EM needs at least one row");
  if (options.max_iter < 1) throw std::invalid_argument("max_iter must be positive");

  const auto data = dedupe(rows);
  DiscreteNetwork current =
      options.init == EmInit::Random ? random_init(structure, options.seed) : uniform_init(structure);

  FitReport report;
  report.unique_rows = data.rows.size();

  auto e_step = [&](const DiscreteNetwork& net) {
    auto ec = kernels::expected_counts(net, data.rows, data.weights, options.threads);
    if (!ec.zero_rows.empty())
      throw NonFiniteLikelihood("row " + std::to_string(data.first_index[ec.zero_rows.front()]) +
                                " has zero probability under the current parameters");
    report.log_likelihood.push_back(ec.log_likelihood);
    report.objective.push_back(ec.log_likelihood + log_prior(net, options.alpha));
    return ec;
  };

  auto ec = e_step(current);
  for (int it = 1; it <= options.max_iter; ++it) {
    auto next = fit_from_counts(structure, ec.tables, options.alpha);
    report.final_delta = max_delta(current, next);
    current = std::move(next);
    report.iterations = it;
    ec = e_step(current);
    // Without missing cells the expected counts do not depend on the
    // parameters, so one M-step reaches the fixed point.
    if (!data.any_missing || report.final_delta < options.tol) {
      report.converged = true;
      break;
    }
  }
  return {std::move(current), std::move(report)};
}

std::vector<int> node_labels(const Cohort& rows, std::size_t node, std::size_t positive_state) {
  std::vector<int> out(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) out[r] = rows.at(r, node) == static_cast<int>(positive_state);
  return out;
}

std::vector<int> any_outcome_labels(const DiscreteNetwork& net, const Cohort& rows) {
  std::vector<int> out(rows.size(), 0);
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (!net.is_outcome(i)) continue;
    const int pos = static_cast<int>(net.positive_state(i));
    for (std::size_t r = 0; r < rows.size(); ++r)
      if (rows.at(r, i) == pos) out[r] = 1;
  }
  return out;
}

Split stratified_split(std::span<const int> labels, std::array<double, 3> fractions, std::uint64_t seed) {
  for (double f : fractions)
    if (!(f >= 0.0)) throw std::invalid_argument("split fractions must be nonnegative");
  if (std::abs(fractions[0] + fractions[1] + fractions[2] - 1.0) > 1e-9)
    throw std::invalid_argument("split fractions must sum to 1");

  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] ? pos : neg).push_back(i);

  Rng rng(seed);
  Split split;
  std::array<std::vector<std::size_t>*, 3> folds{&split.train, &split.valid, &split.test};
  auto allocate = [&](std::vector<std::size_t>& stratum) {
    rng.shuffle(stratum);
    const double m = static_cast<double>(stratum.size());
    std::array<std::size_t, 3> sizes{};
    std::array<double, 3> rem{};
    std::size_t given = 0;
    for (int f = 0; f < 3; ++f) {
      const double exact = fractions[f] * m;
      sizes[f] = static_cast<std::size_t>(std::floor(exact + 1e-9));
      rem[f] = exact - static_cast<double>(sizes[f]);
      given += sizes[f];
    }
    while (given < stratum.size()) {
      int best = 0;
      for (int f = 1; f < 3; ++f)
        if (rem[f] > rem[best] + 1e-12) best = f;
      ++sizes[best];
      rem[best] = -1.0;
      ++given;
    }
    std::size_t at = 0;
    for (int f = 0; f < 3; ++f) {
      folds[f]->insert(folds[f]->end(), stratum.begin() + at, stratum.begin() + at + sizes[f]);
      at += sizes[f];
    }
    return sizes;
  };
  const auto pos_sizes = allocate(pos);
  allocate(neg);
  if (!pos.empty())
    for (int f = 0; f < 3; ++f)
      if (fractions[f] > 0.0 && pos_sizes[f] == 0)
        throw InsufficientPositives(std::to_string(pos.size()) + " positive rows cannot cover every fold");
  for (auto* f : folds) std::sort(f->begin(), f->end());
  return split;
}

std::vector<std::size_t> undersample(std::span<const int> labels, std::uint64_t seed) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty()) throw EmptyClass("undersampling needs positive and negative rows");
  Rng rng(seed);
  rng.shuffle(neg);
  neg.resize(std::min(neg.size(), pos.size()));
  pos.insert(pos.end(), neg.begin(), neg.end());
  std::sort(pos.begin(), pos.end());
  return pos;
}

}  // namespace causalrd
