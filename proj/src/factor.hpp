#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "causalrd/network.hpp"

namespace causalrd::detail {

// Table over a sorted variable scope; the last variable varies fastest.
struct Factor {
  std::vector<std::size_t> vars;
  std::vector<std::size_t> cards;
  std::vector<double> values;

  std::size_t stride_of(std::size_t var) const;
  bool has(std::size_t var) const;
};

Factor scalar_factor(double value);
Factor multiply(const Factor& a, const Factor& b);
Factor sum_out(const Factor& f, std::size_t var);

// CPT of `node` with evidence variables fixed and removed from the scope.
Factor cpt_factor(const DiscreteNetwork& net, std::size_t node, std::span<const int> evidence);

}  // namespace causalrd::detail
