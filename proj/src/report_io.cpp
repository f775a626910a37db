#include "causalrd/report_io.hpp"

#include <cmath>

#include "causalrd/error.hpp"

namespace causalrd {

namespace {

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

template <class T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

std::string cell(double v) { return std::isfinite(v) ? format_double(v) : std::string(); }

Json table_json(const EffectTable& t) {
  Json j = Json::object();
  j["variable"] = t.variable;
  j["outcome"] = t.outcome;
  j["mode"] = std::string(to_string(t.mode));
  j["significant"] = t.significant;
  j["max_difference"] = optional_json(t.max_difference);
  j["ks_min_p"] = optional_json(t.ks_min_p);
  j["rank"] = optional_json(t.rank);
  Json cats = Json::array();
  for (const auto& c : t.categories)
    cats.push_back({{"state", c.state},
                    {"n", c.n},
                    {"mean", number_or_null(c.mean)},
                    {"std", number_or_null(c.std)},
                    {"failures", c.failures}});
  j["categories"] = std::move(cats);
  Json pairs = Json::array();
  for (const auto& p : t.pairs)
    pairs.push_back({{"a", t.categories[p.a].state},
                     {"b", t.categories[p.b].state},
                     {"statistic", p.statistic},
                     {"p_value", p.p_value},
                     {"mean_difference", p.mean_difference}});
  j["pairs"] = std::move(pairs);
  return j;
}

}  // namespace

Json report_json(const RdDoReport& report) {
  Json j = Json::object();
  j["covariates"] = report.covariates;
  j["alpha"] = report.alpha;
  j["corrected_alpha"] = report.corrected_alpha;
  j["split"] = report.split;
  j["cohort_rows"] = report.cohort_rows;
  j["validation_rows"] = report.validation_rows;
  Json tps = Json::array();
  for (const auto& tp : report.time_points) {
    Json t = Json::object();
    t["t"] = tp.t;
    t["outcome"] = tp.outcome;
    t["status"] = tp.status;
    t["detail"] = tp.detail;
    t["threshold"] = tp.status == "NoThreshold" ? Json(nullptr) : Json(tp.threshold);
    t["threshold_source"] = tp.threshold_source;
    t["youden_j"] = tp.youden_j;
    t["scored"] = tp.scored;
    t["score_failures"] = tp.score_failures;
    t["windows_scanned"] = tp.windows_scanned;
    t["randomized_windows"] = tp.randomized_windows;
    t["best"] = tp.best;
    if (tp.window) {
      const auto& w = *tp.window;
      Json pv = Json::object();
      for (std::size_t i = 0; i < w.pvalues.size(); ++i)
        pv[report.covariates.at(i)] = optional_json(w.pvalues[i]);
      t["window"] = {{"k", w.k},
                     {"power", w.power},
                     {"false_positives", w.false_positives},
                     {"false_negatives", w.false_negatives},
                     {"unlabeled", w.unlabeled},
                     {"randomized", w.randomized},
                     {"covariate_p_values", std::move(pv)},
                     {"members", tp.members}};
    } else {
      t["window"] = nullptr;
    }
    Json tables = Json::array();
    for (const auto& table : tp.tables) tables.push_back(table_json(table));
    t["tables"] = std::move(tables);
    Json skipped = Json::array();
    for (const auto& s : tp.skipped)
      skipped.push_back({{"variable", s.variable}, {"mode", std::string(to_string(s.mode))}, {"reason", s.reason}});
    t["skipped"] = std::move(skipped);
    tps.push_back(std::move(t));
  }
  j["time_points"] = std::move(tps);
  return j;
}

CsvTable effects_table(const RdDoReport& report) {
  CsvTable table;
  table.header = {"variable", "t", "mode", "category", "n", "mean", "std", "ks_min_p", "significant", "rank"};
  for (const auto& tp : report.time_points) {
    for (const auto& t : tp.tables) {
      for (const auto& c : t.categories) {
        table.rows.push_back({t.variable, std::to_string(tp.t), std::string(to_string(t.mode)), c.state,
                              std::to_string(c.n), cell(c.mean), cell(c.std),
                              t.ks_min_p ? format_double(*t.ks_min_p) : std::string(),
                              t.significant ? "true" : "false", t.rank ? std::to_string(*t.rank) : std::string()});
      }
    }
  }
  return table;
}

CsvTable timepoints_table(const RdDoReport& report) {
  CsvTable table;
  table.header = {"t",     "outcome", "status",             "threshold",       "threshold_source",
                  "k",     "power",   "randomized_windows", "windows_scanned", "best"};
  for (const auto& tp : report.time_points) {
    table.rows.push_back({std::to_string(tp.t), tp.outcome, tp.status,
                          tp.status == "NoThreshold" ? std::string() : format_double(tp.threshold),
                          tp.threshold_source, tp.window ? std::to_string(tp.window->k) : std::string(),
                          tp.window ? format_double(tp.window->power) : std::string(),
                          std::to_string(tp.randomized_windows), std::to_string(tp.windows_scanned),
                          tp.best ? "true" : "false"});
  }
  return table;
}

void emit_report(const RdDoReport& report, const std::filesystem::path& out, const Json& manifest) {
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw Error("cannot create output directory '" + out.string() + "': " + ec.message());
  write_json_file(out / "report.json", report_json(report));
  write_csv(out / "effects.csv", effects_table(report));
  write_csv(out / "timepoints.csv", timepoints_table(report));
  write_json_file(out / "run_manifest.json", manifest);
}

}  // namespace causalrd
