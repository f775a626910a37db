#include "causalrd/config.hpp"

#include <algorithm>
#include <cstdio>

#include "causalrd/error.hpp"

namespace causalrd {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return std::filesystem::absolute(path).lexically_normal();
}

}  // namespace

RunConfig config_from_json(const Json& input, const std::filesystem::path& base) {
  const Json& doc = input.contains("config") ? input.at("config") : input;
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  static const std::vector<std::string> known{"model",   "cohort",    "validation", "horizon", "outcome",
                                              "time_points", "covariates", "alpha",   "ks_alpha", "k_min",
                                              "k_step",  "k_max",     "thresholds", "variables", "modes",
                                              "seed",    "out"};
  for (const auto& [key, value] : doc.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("unknown config key '" + key + "'");

  RunConfig c;
  try {
    if (!doc.contains("model") || !doc.contains("cohort")) throw ConfigError("config needs \"model\" and \"cohort\"");
    c.model = resolve(base, doc.at("model").get<std::string>());
    c.cohort = resolve(base, doc.at("cohort").get<std::string>());
    if (doc.contains("validation") && !doc.at("validation").is_null())
      c.validation = resolve(base, doc.at("validation").get<std::string>());
    if (doc.contains("horizon") && !doc.at("horizon").is_null()) c.horizon = doc.at("horizon").get<int>();
    if (doc.contains("outcome")) {
      const auto& o = doc.at("outcome");
      if (o.contains("variable"))
        c.outcome = Outcome{o.at("variable").get<std::string>(), o.value("positive_state", std::string())};
      if (o.contains("time_points")) c.time_points = o.at("time_points").get<std::vector<int>>();
    }
    if (doc.contains("time_points")) c.time_points = doc.at("time_points").get<std::vector<int>>();
    if (doc.contains("covariates")) c.covariates = doc.at("covariates").get<std::vector<std::string>>();
    c.alpha = doc.value("alpha", c.alpha);
    c.ks_alpha = doc.value("ks_alpha", c.ks_alpha);
    c.k_min = doc.value("k_min", c.k_min);
    c.k_step = doc.value("k_step", c.k_step);
    if (doc.contains("k_max") && !doc.at("k_max").is_null()) c.k_max = doc.at("k_max").get<std::size_t>();
    if (doc.contains("thresholds")) {
      const auto& t = doc.at("thresholds");
      if (t.is_string()) {
        if (t.get<std::string>() != "youden") throw ConfigError("thresholds must be \"youden\" or an object");
      } else {
        for (const auto& [key, value] : t.items()) {
          if (value.is_string() && value.get<std::string>() == "youden") continue;
          c.thresholds[std::stoi(key)] = value.get<double>();
        }
      }
    }
    if (doc.contains("variables")) {
      const auto& v = doc.at("variables");
      if (v.is_string()) {
        if (v.get<std::string>() != "all-prior") throw ConfigError("variables must be \"all-prior\" or a list");
      } else {
        c.variables = v.get<std::vector<std::string>>();
      }
    }
    if (doc.contains("modes")) {
      c.modes.clear();
      for (const auto& m : doc.at("modes")) c.modes.push_back(parse_effect_mode(m.get<std::string>()));
    }
    c.seed = doc.value("seed", c.seed);
    if (doc.contains("out")) c.out = resolve(base, doc.at("out").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw ConfigError("bad config: threshold keys must be integer time points");
  }
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (!(c.ks_alpha > 0.0 && c.ks_alpha < 1.0)) throw ConfigError("ks_alpha must lie in (0, 1)");
  if (c.k_min < 2) throw ConfigError("k_min must be at least 2");
  if (c.k_step < 1) throw ConfigError("k_step must be positive");
  if (c.modes.empty()) throw ConfigError("modes must not be empty");
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  return config_from_json(read_json_file(path), path.parent_path());
}

Json to_json(const RunConfig& c) {
  Json j = Json::object();
  j["model"] = c.model.string();
  j["cohort"] = c.cohort.string();
  j["validation"] = c.validation ? Json(c.validation->string()) : Json(nullptr);
  j["horizon"] = c.horizon ? Json(*c.horizon) : Json(nullptr);
  if (c.outcome) j["outcome"] = {{"variable", c.outcome->variable}, {"positive_state", c.outcome->positive_state}};
  j["time_points"] = c.time_points;
  if (c.covariates) j["covariates"] = *c.covariates;
  j["alpha"] = c.alpha;
  j["ks_alpha"] = c.ks_alpha;
  j["k_min"] = c.k_min;
  j["k_step"] = c.k_step;
  j["k_max"] = c.k_max ? Json(*c.k_max) : Json(nullptr);
  Json th = Json::object();
  for (const auto& [t, v] : c.thresholds) th[std::to_string(t)] = v;
  j["thresholds"] = c.thresholds.empty() ? Json("youden") : th;
  j["variables"] = c.variables.empty() ? Json("all-prior") : Json(c.variables);
  Json modes = Json::array();
  for (auto m : c.modes) modes.push_back(std::string(to_string(m)));
  j["modes"] = modes;
  j["seed"] = c.seed;
  j["out"] = c.out.string();
  return j;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace causalrd
