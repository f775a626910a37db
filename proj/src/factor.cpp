#include "factor.hpp"

#include <algorithm>

namespace causalrd::detail {

std::size_t Factor::stride_of(std::size_t var) const {
  std::size_t stride = 1;
  for (std::size_t i = vars.size(); i-- > 0;) {
    if (vars[i] == var) return stride;
    stride *= cards[i];
  }
  return 0;
}

bool Factor::has(std::size_t var) const { return std::binary_search(vars.begin(), vars.end(), var); }

Factor scalar_factor(double value) { return Factor{{}, {}, {value}}; }

Factor multiply(const Factor& a, const Factor& b) {
  Factor out;
  std::set_union(a.vars.begin(), a.vars.end(), b.vars.begin(), b.vars.end(), std::back_inserter(out.vars));
  std::size_t total = 1;
  for (auto v : out.vars) {
    const auto ia = std::lower_bound(a.vars.begin(), a.vars.end(), v);
    const std::size_t card = (ia != a.vars.end() && *ia == v)
                                 ? a.cards[static_cast<std::size_t>(ia - a.vars.begin())]
                                 : b.cards[static_cast<std::size_t>(std::lower_bound(b.vars.begin(), b.vars.end(), v) -
                                                                    b.vars.begin())];
    out.cards.push_back(card);
    total *= card;
  }
  out.values.resize(total);

  const auto n = out.vars.size();
  std::vector<std::size_t> sa(n), sb(n), counter(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    sa[i] = a.stride_of(out.vars[i]);
    sb[i] = b.stride_of(out.vars[i]);
  }
  std::size_t ia = 0, ib = 0;
  for (std::size_t k = 0; k < total; ++k) {
    out.values[k] = a.values[ia] * b.values[ib];
    // Odometer increment, last variable fastest.
    for (std::size_t d = n; d-- > 0;) {
      if (++counter[d] < out.cards[d]) {
        ia += sa[d];
        ib += sb[d];
        break;
      }
      counter[d] = 0;
      ia -= sa[d] * (out.cards[d] - 1);
      ib -= sb[d] * (out.cards[d] - 1);
    }
  }
  return out;
}

Factor sum_out(const Factor& f, std::size_t var) {
  const auto pos = static_cast<std::size_t>(std::lower_bound(f.vars.begin(), f.vars.end(), var) - f.vars.begin());
  Factor out;
  out.vars = f.vars;
  out.cards = f.cards;
  out.vars.erase(out.vars.begin() + static_cast<std::ptrdiff_t>(pos));
  out.cards.erase(out.cards.begin() + static_cast<std::ptrdiff_t>(pos));
  std::size_t inner = 1;
  for (std::size_t i = pos + 1; i < f.cards.size(); ++i) inner *= f.cards[i];
  const std::size_t card = f.cards[pos];
  const std::size_t outer = f.values.size() / (inner * card);
  out.values.assign(outer * inner, 0.0);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t s = 0; s < card; ++s)
      for (std::size_t i = 0; i < inner; ++i) out.values[o * inner + i] += f.values[(o * card + s) * inner + i];
  return out;
}

Factor cpt_factor(const DiscreteNetwork& net, std::size_t node, std::span<const int> evidence) {
  const auto& parents = net.parents(node);
  Factor f;
  for (auto p : parents)
    if (evidence[p] < 0) f.vars.push_back(p);
  if (evidence[node] < 0) f.vars.push_back(node);
  std::sort(f.vars.begin(), f.vars.end());
  std::size_t total = 1;
  for (auto v : f.vars) {
    f.cards.push_back(net.cardinality(v));
    total *= f.cards.back();
  }
  f.values.resize(total);

  // Walk the free assignment; fixed variables come from evidence.
  std::vector<int> assignment(evidence.begin(), evidence.end());
  std::vector<std::size_t> counter(f.vars.size(), 0);
  for (auto v : f.vars) assignment[v] = 0;
  const auto card = net.cardinality(node);
  const auto& table = net.cpt(node).table;
  for (std::size_t k = 0; k < total; ++k) {
    const auto row = net.row_index(node, assignment);
    f.values[k] = table[row * card + static_cast<std::size_t>(assignment[node])];
    for (std::size_t d = f.vars.size(); d-- > 0;) {
      if (++counter[d] < f.cards[d]) {
        assignment[f.vars[d]] = static_cast<int>(counter[d]);
        break;
      }
      counter[d] = 0;
      assignment[f.vars[d]] = 0;
    }
  }
  return f;
}

}  // namespace causalrd::detail
