#include "causalrd/preprocess.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "causalrd/error.hpp"

namespace causalrd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::optional<double> parse_number(const std::string& text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && last[-1] == ' ') --last;
  if (first < last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

double entropy(double pos, double n) {
  if (n <= 0.0) return 0.0;
  double h = 0.0;
  for (double c : {pos, n - pos})
    if (c > 0.0) h -= c / n * std::log2(c / n);
  return h;
}

int classes(double pos, double n) { return (pos > 0.0) + (n - pos > 0.0); }

struct Mdlp {
  std::vector<double> values;    // sorted
  std::vector<double> prefix;    // prefix[i] = positives among values[0, i)
  std::vector<double> cuts;

  // True when a cut between values[i-1] and values[i] separates two runs
  // that are not both pure in the same class.
  bool boundary(std::size_t lo, std::size_t i, std::size_t hi) const {
    std::size_t a = i, b = i;
    while (a > lo && values[a - 1] == values[i - 1]) --a;
    while (b < hi && values[b] == values[i]) ++b;
    const double lp = prefix[i] - prefix[a], ln = static_cast<double>(i - a);
    const double rp = prefix[b] - prefix[i], rn = static_cast<double>(b - i);
    const bool both_pos = lp == ln && rp == rn;
    const bool both_neg = lp == 0.0 && rp == 0.0;
    return !both_pos && !both_neg;
  }

  void split(std::size_t lo, std::size_t hi) {
    const double n = static_cast<double>(hi - lo);
    if (hi - lo < 2) return;
    const double pos = prefix[hi] - prefix[lo];
    const double h = entropy(pos, n);
    if (h == 0.0) return;

    std::size_t best = 0;
    double best_e = kInf;
    for (std::size_t i = lo + 1; i < hi; ++i) {
      if (values[i] == values[i - 1] || !boundary(lo, i, hi)) continue;
      const double n1 = static_cast<double>(i - lo);
      const double p1 = prefix[i] - prefix[lo];
      const double e = (n1 * entropy(p1, n1) + (n - n1) * entropy(pos - p1, n - n1)) / n;
      if (e < best_e) {
        best_e = e;
        best = i;
      }
    }
    if (best == 0) return;

    const double n1 = static_cast<double>(best - lo), n2 = n - n1;
    const double p1 = prefix[best] - prefix[lo], p2 = pos - p1;
    const double h1 = entropy(p1, n1), h2 = entropy(p2, n2);
    const int k = classes(pos, n), k1 = classes(p1, n1), k2 = classes(p2, n2);
    const double gain = h - best_e;
    const double delta = std::log2(std::pow(3.0, k) - 2.0) - (k * h - k1 * h1 - k2 * h2);
    if (!(gain > (std::log2(n - 1.0) + delta) / n)) return;

    split(lo, best);
    cuts.push_back((values[best - 1] + values[best]) / 2.0);
    split(best, hi);
  }
};

std::string bin_label(const std::vector<double>& cuts, std::size_t bin) {
  if (cuts.empty()) return "all";
  if (bin == 0) return "<" + format_double(cuts.front());
  if (bin == cuts.size()) return ">=" + format_double(cuts.back());
  return format_double(cuts[bin - 1]) + ".." + format_double(cuts[bin]);
}

}  // namespace

std::vector<std::optional<double>> numeric_column(const CsvTable& table, std::size_t column,
                                                  const std::string& source) {
  std::vector<std::optional<double>> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& cell = table.rows[r].at(column);
    if (cell.empty()) {
      out.emplace_back();
      continue;
    }
    auto v = parse_number(cell);
    if (!v)
      throw CohortFormatError(source + ": row " + std::to_string(r + 1) + ", column '" + table.header[column] +
                              "': '" + cell + "' is not a number");
    out.push_back(v);
  }
  return out;
}

PlausibilityResult apply_plausibility(const CsvTable& table, std::span<const PlausibilityRange> ranges) {
  PlausibilityResult result{table, {}};
  for (const auto& range : ranges) {
    if (!(range.min <= range.max))
      throw ConfigError("plausibility range for '" + range.variable + "' has min > max");
    bool matched = false;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      if (parse_node_name(table.header[c]).base != range.variable) continue;
      matched = true;
      const auto values = numeric_column(table, c);
      for (std::size_t r = 0; r < values.size(); ++r) {
        if (!values[r]) continue;
        const double v = *values[r];
        if (v < range.min || v > range.max || std::isnan(v)) {
          result.table.rows[r][c].clear();
          result.changes.push_back({r, table.header[c], v});
        }
      }
    }
    if (!matched) throw ConfigError("plausibility range names unknown variable '" + range.variable + "'");
  }
  std::stable_sort(result.changes.begin(), result.changes.end(),
                   [](const auto& a, const auto& b) { return a.row < b.row; });
  return result;
}

std::vector<PlausibilityRange> ranges_from_json(const Json& doc) {
  const Json& list = doc.is_object() ? doc.at("ranges") : doc;
  if (!list.is_array()) throw ConfigError("plausibility ranges must be a list");
  std::vector<PlausibilityRange> out;
  try {
    for (const auto& item : list)
      out.push_back({item.at("name").get<std::string>(), item.at("min").get<double>(), item.at("max").get<double>()});
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad plausibility range: ") + e.what());
  }
  return out;
}

BinningScheme make_scheme(std::string variable, std::vector<double> cuts) {
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    if (!std::isfinite(cuts[i])) throw NonFiniteValue("cut point for '" + variable + "'");
    if (i && !(cuts[i] > cuts[i - 1])) throw InvalidModel("cut points for '" + variable + "' must increase strictly");
  }
  BinningScheme s;
  s.variable = std::move(variable);
  s.cuts = std::move(cuts);
  for (std::size_t b = 0; b < s.bins(); ++b) {
    s.states.push_back(bin_label(s.cuts, b));
    s.intervals.push_back({b == 0 ? -kInf : s.cuts[b - 1], b == s.cuts.size() ? kInf : s.cuts[b]});
  }
  return s;
}

BinningScheme mdlp_cuts(std::span<const double> values, std::span<const int> labels, std::string variable) {
  if (values.size() != labels.size()) throw std::invalid_argument("values and labels differ in length");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw NonFiniteValue("value at position " + std::to_string(i));
    if (labels[i] != 0 && labels[i] != 1) throw std::invalid_argument("labels must be 0 or 1");
  }
  // Sorting by (value, label) makes the result independent of input order.
  std::sort(order.begin(), order.end(), [&](auto a, auto b) {
    return values[a] != values[b] ? values[a] < values[b] : labels[a] < labels[b];
  });
  Mdlp m;
  m.values.reserve(values.size());
  m.prefix.assign(1, 0.0);
  for (auto i : order) {
    m.values.push_back(values[i]);
    m.prefix.push_back(m.prefix.back() + labels[i]);
  }
  m.split(0, m.values.size());
  return make_scheme(std::move(variable), std::move(m.cuts));
}

std::optional<std::size_t> apply_bins(std::optional<double> value, const BinningScheme& scheme) {
  if (!value) return std::nullopt;
  if (!std::isfinite(*value)) throw NonFiniteValue("cannot bin a non-finite value for '" + scheme.variable + "'");
  return static_cast<std::size_t>(std::upper_bound(scheme.cuts.begin(), scheme.cuts.end(), *value) -
                                  scheme.cuts.begin());
}

Json to_json(const BinningScheme& scheme) {
  Json doc = Json::object();
  doc["variable"] = scheme.variable;
  doc["cuts"] = scheme.cuts;
  doc["states"] = scheme.states;
  return doc;
}

BinningScheme scheme_from_json(const Json& doc) {
  try {
    auto s = make_scheme(doc.at("variable").get<std::string>(), doc.at("cuts").get<std::vector<double>>());
    if (doc.contains("states")) {
      auto states = doc.at("states").get<std::vector<std::string>>();
      if (states.size() != s.bins()) throw ConfigError("scheme for '" + s.variable + "' lists the wrong state count");
      s.states = std::move(states);
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad binning scheme: ") + e.what());
  }
}

VariableDef binned_variable(const VariableDef& original, const BinningScheme& scheme) {
  if (scheme.bins() < 2)
    throw InvalidModel("no cut points for '" + scheme.variable + "'; a model variable needs at least two states");
  VariableDef v = original;
  v.states = scheme.states;
  v.intervals = scheme.intervals;
  return v;
}

ModelDocument apply_scheme(const ModelDocument& doc, const BinningScheme& scheme) {
  if (const auto* tpl = std::get_if<DbnTemplate>(&doc)) {
    DbnTemplate out = *tpl;
    bool found = false;
    for (auto& v : out.variables) {
      if (v.name != scheme.variable) continue;
      v = binned_variable(v, scheme);
      found = true;
    }
    if (!found) throw UnknownVariable("'" + scheme.variable + "' is not a model variable");
    out.cpts.clear();
    return out;
  }
  const auto& net = std::get<DiscreteNetwork>(doc);
  auto vars = net.variables();
  std::vector<bool> touched(net.size(), false);
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (net.node_name(i).base != scheme.variable) continue;
    vars[i] = binned_variable(vars[i], scheme);
    touched[i] = true;
  }
  if (std::find(touched.begin(), touched.end(), true) == touched.end())
    throw UnknownVariable("'" + scheme.variable + "' is not a model variable");
  auto cpts = net.cpts();
  for (std::size_t i = 0; i < net.size(); ++i) {
    bool reset = touched[i];
    for (auto p : net.parents(i)) reset = reset || touched[p];
    if (reset) cpts[i] = uniform_cpt(vars, i, cpts[i].parents);
  }
  return DiscreteNetwork(std::move(vars), std::move(cpts), net.outcome());
}

}  // namespace causalrd
