#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "causalrd/model_io.hpp"
#include "causalrd/network.hpp"
#include "causalrd/rddo.hpp"

namespace causalrd {

inline constexpr const char* kVersion = "0.1.0";

// Settings of one rd-do run. Relative paths are resolved against the
// directory of the config file.
struct RunConfig {
  std::filesystem::path model;
  std::filesystem::path cohort;
  std::optional<std::filesystem::path> validation;
  std::optional<int> horizon;
  std::optional<Outcome> outcome;      // overrides the model's outcome designation
  std::vector<int> time_points;        // empty: every outcome slice >= 1
  std::optional<std::vector<std::string>> covariates;  // unset: observed static and entry nodes
  double alpha = 0.05;
  double ks_alpha = 0.05;
  std::size_t k_min = 200;
  std::size_t k_step = 1;
  std::optional<std::size_t> k_max;
  std::map<int, double> thresholds;    // missing time points use Youden
  std::vector<std::string> variables;  // empty: all prior nodes
  std::vector<EffectMode> modes{EffectMode::Associational, EffectMode::Causal};
  std::uint64_t seed = 0;
  std::filesystem::path out = "rddo_out";
};

// Accepts a config document or a run manifest carrying one under "config".
// Throws ConfigError.
RunConfig config_from_json(const Json& doc, const std::filesystem::path& base = {});
RunConfig load_config(const std::filesystem::path& path);
Json to_json(const RunConfig& config);

// 64-bit FNV-1a over the bytes, as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace causalrd
