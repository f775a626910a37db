#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "causalrd/cohort.hpp"
#include "causalrd/model_io.hpp"
#include "causalrd/network.hpp"

namespace causalrd {

struct PlausibilityRange {
  std::string variable;  // base name; applies to every slice column of it
  double min = 0.0;
  double max = 0.0;
};

struct PlausibilityChange {
  std::size_t row = 0;
  std::string column;
  double original = 0.0;
};

struct PlausibilityResult {
  CsvTable table;
  std::vector<PlausibilityChange> changes;
};

// Cells outside [min, max] become empty (missing). Throws ConfigError for a
// range that matches no column or has min > max, CohortFormatError for a
// non-numeric cell in a ranged column.
PlausibilityResult apply_plausibility(const CsvTable& table, std::span<const PlausibilityRange> ranges);

std::vector<PlausibilityRange> ranges_from_json(const Json& doc);

// Parses one column as numbers; empty cells are nullopt.
std::vector<std::optional<double>> numeric_column(const CsvTable& table, std::size_t column,
                                                  const std::string& source = "table");

struct BinningScheme {
  std::string variable;
  std::vector<double> cuts;         // strictly increasing
  std::vector<std::string> states;  // cuts.size() + 1 labels
  std::vector<Interval> intervals;  // partition of the real line

  std::size_t bins() const { return cuts.size() + 1; }
};

BinningScheme make_scheme(std::string variable, std::vector<double> cuts);

// Recursive entropy-minimizing binary splits at class-boundary midpoints,
// each kept only when it passes the MDL stopping rule. Labels are 0/1.
BinningScheme mdlp_cuts(std::span<const double> values, std::span<const int> labels, std::string variable = {});

// Bin index of `value`; a value equal to a cut goes right. Throws NonFiniteValue.
std::optional<std::size_t> apply_bins(std::optional<double> value, const BinningScheme& scheme);

Json to_json(const BinningScheme& scheme);
BinningScheme scheme_from_json(const Json& doc);

// Replaces the states and intervals of the scheme's variable (every slice
// node of it). Parameters touching it are reset: a template loses its CPTs,
// a literal network gets uniform CPTs on the affected families.
ModelDocument apply_scheme(const ModelDocument& doc, const BinningScheme& scheme);
VariableDef binned_variable(const VariableDef& original, const BinningScheme& scheme);

}  // namespace causalrd
