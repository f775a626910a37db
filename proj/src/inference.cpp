#include "causalrd/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "causalrd/error.hpp"
#include "factor.hpp"

namespace causalrd {

using detail::Factor;

Evidence::Evidence(std::initializer_list<std::pair<std::size_t, std::size_t>> items) {
  for (const auto& [node, state] : items) set(node, state);
}

void Evidence::set(std::size_t node, std::size_t state) {
  auto it = std::lower_bound(items_.begin(), items_.end(), node,
                             [](const auto& item, std::size_t n) { return item.first < n; });
  if (it != items_.end() && it->first == node)
    it->second = state;
  else
    items_.insert(it, {node, state});
}

void Evidence::erase(std::size_t node) {
  std::erase_if(items_, [node](const auto& item) { return item.first == node; });
}

std::optional<std::size_t> Evidence::get(std::size_t node) const {
  auto it = std::lower_bound(items_.begin(), items_.end(), node,
                             [](const auto& item, std::size_t n) { return item.first < n; });
  if (it != items_.end() && it->first == node) return it->second;
  return std::nullopt;
}

void Evidence::check(const DiscreteNetwork& net) const {
  for (const auto& [node, state] : items_) {
    if (node >= net.size()) throw UnknownVariable("evidence node index " + std::to_string(node));
    if (state >= net.cardinality(node))
      throw UnknownState("state " + std::to_string(state) + " of '" + net.variable(node).name + "'");
  }
}

std::vector<int> Evidence::dense(std::size_t width) const {
  std::vector<int> out(width, kMissing);
  for (const auto& [node, state] : items_) out.at(node) = static_cast<int>(state);
  return out;
}

Evidence Evidence::from_labels(const DiscreteNetwork& net,
                               const std::vector<std::pair<std::string, std::string>>& labels) {
  Evidence ev;
  for (const auto& [name, label] : labels) {
    const auto node = net.index_of(name);
    if (ev.contains(node)) throw std::invalid_argument("evidence names '" + name + "' twice");
    ev.set(node, net.state_of(node, label));
  }
  return ev;
}

Evidence Evidence::from_dense(std::span<const int> dense) {
  Evidence ev;
  for (std::size_t i = 0; i < dense.size(); ++i)
    if (dense[i] >= 0) ev.items_.emplace_back(i, static_cast<std::size_t>(dense[i]));
  return ev;
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Eliminated {
  Factor joint;
  double log_scale = 0.0;
  bool zero = false;
};

std::vector<std::size_t> elimination_order(std::size_t n, const std::vector<Factor>& factors,
                                           const std::vector<bool>& hidden, std::span<const std::size_t> hint) {
  std::vector<std::size_t> order;
  std::vector<bool> placed(n, false);
  for (auto v : hint) {
    if (v < n && hidden[v] && !placed[v]) {
      placed[v] = true;
      order.push_back(v);
    }
  }
  std::vector<std::set<std::size_t>> adj(n);
  for (const auto& f : factors)
    for (auto a : f.vars)
      for (auto b : f.vars)
        if (a != b) adj[a].insert(b);
  // Hinted nodes are eliminated first; reflect that in the graph.
  auto eliminate_node = [&](std::size_t v) {
    for (auto a : adj[v])
      for (auto b : adj[v])
        if (a != b) adj[a].insert(b);
    for (auto a : adj[v]) adj[a].erase(v);
    adj[v].clear();
  };
  for (auto v : order) eliminate_node(v);
  while (true) {
    std::size_t best = n;
    for (std::size_t v = 0; v < n; ++v)
      if (hidden[v] && !placed[v] && (best == n || adj[v].size() < adj[best].size())) best = v;
    if (best == n) break;
    placed[best] = true;
    order.push_back(best);
    eliminate_node(best);
  }
  return order;
}

Eliminated eliminate(const DiscreteNetwork& net, std::span<const std::size_t> query, std::span<const int> evidence,
                     std::span<const std::size_t> hint) {
  const auto n = net.size();
  std::vector<std::size_t> seeds(query.begin(), query.end());
  for (std::size_t i = 0; i < n; ++i)
    if (evidence[i] >= 0) seeds.push_back(i);
  const auto relevant = ancestral_set(net, seeds);

  Eliminated result;
  std::vector<Factor> factors;
  for (std::size_t i = 0; i < n; ++i) {
    if (!relevant[i]) continue;
    auto f = detail::cpt_factor(net, i, evidence);
    if (f.vars.empty()) {
      if (f.values[0] <= 0.0) {
        result.zero = true;
        return result;
      }
      result.log_scale += std::log(f.values[0]);
      continue;
    }
    factors.push_back(std::move(f));
  }

  std::vector<bool> hidden(n, false);
  for (std::size_t i = 0; i < n; ++i) hidden[i] = relevant[i] && evidence[i] < 0;
  for (auto q : query) hidden[q] = false;

  for (auto var : elimination_order(n, factors, hidden, hint)) {
    Factor product = detail::scalar_factor(1.0);
    std::vector<Factor> rest;
    rest.reserve(factors.size());
    for (auto& f : factors) {
      if (f.has(var))
        product = detail::multiply(product, f);
      else
        rest.push_back(std::move(f));
    }
    factors = std::move(rest);
    if (!product.has(var)) continue;
    Factor summed = detail::sum_out(product, var);
    double total = 0.0;
    for (double v : summed.values) total += v;
    if (!(total > 0.0)) {
      result.zero = true;
      return result;
    }
    result.log_scale += std::log(total);
    if (summed.vars.empty()) continue;
    for (double& v : summed.values) v /= total;
    factors.push_back(std::move(summed));
  }

  Factor joint = detail::scalar_factor(1.0);
  for (const auto& f : factors) joint = detail::multiply(joint, f);
  double total = 0.0;
  for (double v : joint.values) total += v;
  if (!(total > 0.0)) {
    result.zero = true;
    return result;
  }
  for (double& v : joint.values) v /= total;
  result.log_scale += std::log(total);
  result.joint = std::move(joint);
  return result;
}

}  // namespace

std::vector<double> posterior_dense(const DiscreteNetwork& net, std::size_t target, std::span<const int> evidence,
                                    EliminationOptions options) {
  const std::size_t query[] = {target};
  auto out = eliminate(net, query, evidence, options.order);
  if (out.zero) throw ZeroProbabilityEvidence("P(evidence) = 0 when querying '" + net.variable(target).name + "'");
  return std::move(out.joint.values);
}

JointPosterior joint_posterior_dense(const DiscreteNetwork& net, std::span<const std::size_t> query,
                                     std::span<const int> evidence) {
  auto out = eliminate(net, query, evidence, {});
  if (out.zero) return {{}, kNegInf};
  JointPosterior jp;
  jp.log_evidence = out.log_scale;
  // The scope may miss query nodes only when the query is empty.
  jp.probabilities = std::move(out.joint.values);
  return jp;
}

double log_evidence_dense(const DiscreteNetwork& net, std::span<const int> evidence) {
  auto out = eliminate(net, {}, evidence, {});
  return out.zero ? kNegInf : out.log_scale;
}

Posterior posterior(const DiscreteNetwork& net, std::size_t target, const Evidence& evidence,
                    EliminationOptions options) {
  if (target >= net.size()) throw UnknownVariable("target index " + std::to_string(target));
  evidence.check(net);
  if (evidence.contains(target))
    throw std::invalid_argument("target '" + net.variable(target).name + "' is also evidence");
  const auto dense = evidence.dense(net.size());
  return Posterior{target, posterior_dense(net, target, dense, options)};
}

Posterior do_posterior(const DiscreteNetwork& net, std::size_t target, Intervention intervention,
                       const Evidence& evidence) {
  if (intervention.node >= net.size()) throw UnknownVariable("intervention index " + std::to_string(intervention.node));
  if (intervention.state >= net.cardinality(intervention.node))
    throw UnknownState("state " + std::to_string(intervention.state) + " of '" +
                       net.variable(intervention.node).name + "'");
  if (intervention.node == target) throw std::invalid_argument("cannot intervene on the query target");
  if (evidence.contains(intervention.node))
    throw std::invalid_argument("intervened node '" + net.variable(intervention.node).name + "' is also evidence");
  const auto mutilated = mutilate(net, intervention.node);
  Evidence ev = evidence;
  ev.set(intervention.node, intervention.state);
  return posterior(mutilated, target, ev);
}

double joint_probability(const DiscreteNetwork& net, std::span<const int> assignment) {
  if (assignment.size() != net.size()) throw IncompleteAssignment("assignment covers " + std::to_string(assignment.size()) +
                                                                  " of " + std::to_string(net.size()) + " nodes");
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (assignment[i] < 0) throw IncompleteAssignment("node '" + net.variable(i).name + "' unassigned");
    if (static_cast<std::size_t>(assignment[i]) >= net.cardinality(i))
      throw UnknownState("state " + std::to_string(assignment[i]) + " of '" + net.variable(i).name + "'");
  }
  double p = 1.0;
  for (std::size_t i = 0; i < net.size(); ++i)
    p *= net.probability(i, net.row_index(i, assignment), static_cast<std::size_t>(assignment[i]));
  return p;
}

LogLikelihood marginal_log_likelihood(const DiscreteNetwork& net, const Cohort& rows) {
  if (rows.width() != net.size()) throw std::invalid_argument("cohort width does not match the network");
  LogLikelihood ll;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double lp = log_evidence_dense(net, rows.row(r));
    if (std::isinf(lp)) {
      ll.zero_rows.push_back(r);
      ll.total = kNegInf;
    } else if (!ll.zero_rows.size()) {
      ll.total += lp;
    }
  }
  return ll;
}

}  // namespace causalrd
