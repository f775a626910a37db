#include "causalrd/cli.hpp"

#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "CLI11.hpp"
#include "causalrd/config.hpp"
#include "causalrd/error.hpp"
#include "causalrd/inference.hpp"
#include "causalrd/learning.hpp"
#include "causalrd/model_io.hpp"
#include "causalrd/preprocess.hpp"
#include "causalrd/rddo.hpp"
#include "causalrd/report_io.hpp"
#include "causalrd/stats.hpp"
#include "causalrd/synth.hpp"

namespace causalrd {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::pair<std::string, std::string> key_value(const std::string& item) {
  const auto eq = item.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
    throw ConfigError("expected name=state, got '" + item + "'");
  return {item.substr(0, eq), item.substr(eq + 1)};
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A path to a file of numbers, or an inline comma-separated list.
std::vector<double> read_numbers(const std::string& arg, const char* what) {
  const std::string text = fs::is_regular_file(arg) ? read_file(arg) : arg;
  std::vector<double> out;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size()) throw CohortFormatError(std::string(what) + ": '" + token + "' is not a number");
    out.push_back(v);
    token.clear();
  };
  for (char c : text) {
    if (c == ',' || c == '\n' || c == '\r' || c == ' ' || c == '\t')
      flush();
    else
      token += c;
  }
  flush();
  return out;
}

std::string number_text(double v) { return format_double(v); }

Json threshold_json(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : "-inf";
}

// --- discretize -------------------------------------------------------------

struct DiscretizeArgs {
  std::string cohort, out, ranges, label, positive = "1", apply_scheme, model, model_out;
  std::vector<std::string> vars;
};

int run_discretize(const DiscretizeArgs& a, std::ostream& out) {
  CsvTable table = read_csv(a.cohort);
  fs::create_directories(a.out);

  std::vector<PlausibilityRange> ranges;
  if (!a.ranges.empty()) {
    ranges = ranges_from_json(read_json_file(a.ranges));
    auto filtered = apply_plausibility(table, ranges);
    table = std::move(filtered.table);
    CsvTable log;
    log.header = {"row", "column", "original"};
    for (const auto& c : filtered.changes)
      log.rows.push_back({std::to_string(c.row + 1), c.column, number_text(c.original)});
    write_csv(fs::path(a.out) / "plausibility_log.csv", log);
    out << "plausibility: " << filtered.changes.size() << " values set to missing\n";
  }

  std::vector<BinningScheme> schemes;
  if (!a.apply_scheme.empty()) {
    const Json doc = read_json_file(a.apply_scheme);
    const Json& list = doc.is_object() ? doc.at("schemes") : doc;
    for (const auto& s : list) schemes.push_back(scheme_from_json(s));
  } else {
    std::vector<std::string> vars = a.vars;
    if (vars.empty())
      for (const auto& r : ranges) vars.push_back(r.variable);
    if (vars.empty()) throw ConfigError("nothing to discretize: give --vars or --ranges");
    if (a.label.empty()) throw ConfigError("learning cut points needs --label");
    const auto label_col = table.column(a.label);
    if (label_col == static_cast<std::size_t>(-1)) throw ConfigError("label column '" + a.label + "' not found");
    for (const auto& var : vars) {
      std::vector<double> values;
      std::vector<int> labels;
      bool matched = false;
      for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (c == label_col || table.header[c] == "id" || parse_node_name(table.header[c]).base != var) continue;
        matched = true;
        const auto col = numeric_column(table, c, a.cohort);
        for (std::size_t r = 0; r < col.size(); ++r) {
          const auto& lab = table.rows[r][label_col];
          if (!col[r] || lab.empty()) continue;
          values.push_back(*col[r]);
          labels.push_back(lab == a.positive ? 1 : 0);
        }
      }
      if (!matched) throw ConfigError("no column for variable '" + var + "'");
      schemes.push_back(mdlp_cuts(values, labels, var));
    }
  }

  for (const auto& s : schemes) {
    bool matched = false;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      if (table.header[c] == "id" || parse_node_name(table.header[c]).base != s.variable) continue;
      matched = true;
      const auto col = numeric_column(table, c, a.cohort);
      for (std::size_t r = 0; r < col.size(); ++r) {
        const auto bin = apply_bins(col[r], s);
        table.rows[r][c] = bin ? s.states[*bin] : std::string();
      }
    }
    if (!matched) throw ConfigError("no column for variable '" + s.variable + "'");
    out << s.variable << ": " << s.cuts.size() << " cut(s)";
    for (double cut : s.cuts) out << ' ' << number_text(cut);
    out << '\n';
  }
  write_csv(fs::path(a.out) / "binned.csv", table);
  Json list = Json::array();
  for (const auto& s : schemes) list.push_back(to_json(s));
  write_json_file(fs::path(a.out) / "schemes.json", Json{{"schemes", list}});

  if (!a.model.empty()) {
    ModelDocument doc = load_model(a.model);
    for (const auto& s : schemes) doc = apply_scheme(doc, s);
    const fs::path target = a.model_out.empty() ? fs::path(a.out) / "model.json" : fs::path(a.model_out);
    write_json_file(target, std::visit([](const auto& m) { return to_json(m); }, doc));
  }
  return 0;
}

// --- learn ------------------------------------------------------------------

struct LearnArgs {
  std::string model, cohort, out, init = "uniform";
  std::optional<int> horizon;
  double alpha = 1.0, tol = 1e-6;
  int max_iter = 200, threads = 1;
  std::uint64_t seed = 0;
  bool undersample = false;
};

int run_learn(const LearnArgs& a, std::ostream& out) {
  const auto net = load_network(a.model, a.horizon);
  Cohort rows = load_cohort(a.cohort, net);
  if (a.undersample) {
    const auto keep = causalrd::undersample(any_outcome_labels(net, rows), a.seed);
    rows = rows.subset(keep);
  }
  EmOptions opts;
  if (a.init == "random")
    opts.init = EmInit::Random;
  else if (a.init != "uniform")
    throw ConfigError("--init must be uniform or random");
  opts.seed = a.seed;
  opts.max_iter = a.max_iter;
  opts.tol = a.tol;
  opts.alpha = a.alpha;
  opts.threads = a.threads;
  const auto fit = em_fit(net, rows, opts);

  fs::create_directories(a.out);
  save_network(fs::path(a.out) / "model.json", fit.network);
  Json rep = Json::object();
  rep["rows"] = rows.size();
  rep["unique_rows"] = fit.report.unique_rows;
  rep["iterations"] = fit.report.iterations;
  rep["converged"] = fit.report.converged;
  rep["final_delta"] = fit.report.final_delta;
  rep["alpha"] = a.alpha;
  rep["log_likelihood"] = fit.report.log_likelihood;
  rep["objective"] = fit.report.objective;
  write_json_file(fs::path(a.out) / "fit_report.json", rep);
  out << "em: " << fit.report.iterations << " iteration(s), converged=" << (fit.report.converged ? "true" : "false")
      << ", log-likelihood " << number_text(fit.report.log_likelihood.back()) << '\n';
  return 0;
}

// --- infer ------------------------------------------------------------------

struct InferArgs {
  std::string model, target, evidence, intervention;
  std::optional<int> horizon;
};

int run_infer(const InferArgs& a, std::ostream& out) {
  const auto net = load_network(a.model, a.horizon);
  const auto target = net.index_of(a.target);
  std::vector<std::pair<std::string, std::string>> labels;
  for (const auto& item : split(a.evidence, ',')) labels.push_back(key_value(item));
  const auto evidence = Evidence::from_labels(net, labels);

  Json doc = Json::object();
  doc["target"] = a.target;
  Json ev = Json::object();
  for (const auto& [k, v] : labels) ev[k] = v;
  doc["evidence"] = ev;
  Posterior post;
  if (!a.intervention.empty()) {
    const auto [xname, xstate] = key_value(a.intervention);
    const auto x = net.index_of(xname);
    post = do_posterior(net, target, {x, net.state_of(x, xstate)}, evidence);
    doc["do"] = {{xname, xstate}};
  } else {
    post = posterior(net, target, evidence);
    doc["do"] = nullptr;
  }
  Json probs = Json::object();
  for (std::size_t s = 0; s < post.probabilities.size(); ++s) probs[net.variable(target).states[s]] = post[s];
  doc["probabilities"] = probs;
  out << doc.dump(2) << '\n';
  return 0;
}

// --- threshold --------------------------------------------------------------

struct ThresholdArgs {
  std::string scores, labels, model, cohort;
  std::optional<int> horizon, t;
  int threads = 1;
};

int run_threshold(const ThresholdArgs& a, std::ostream& out) {
  std::vector<double> scores;
  std::vector<int> labels;
  if (!a.scores.empty() || !a.labels.empty()) {
    if (a.scores.empty() || a.labels.empty()) throw ConfigError("--scores and --labels go together");
    scores = read_numbers(a.scores, "scores");
    for (double v : read_numbers(a.labels, "labels")) {
      if (v != 0.0 && v != 1.0) throw CohortFormatError("labels must be 0 or 1");
      labels.push_back(static_cast<int>(v));
    }
    if (scores.size() != labels.size())
      throw CohortFormatError(std::to_string(scores.size()) + " scores but " + std::to_string(labels.size()) +
                              " labels");
  } else {
    if (a.model.empty() || a.cohort.empty() || !a.t)
      throw ConfigError("give --scores/--labels, or --model, --cohort and --t");
    const auto net = load_network(a.model, a.horizon);
    const auto rows = load_cohort(a.cohort, net);
    const auto y = net.outcome_node(*a.t);
    if (!y) throw ConfigError("the model has no outcome node at t = " + std::to_string(*a.t));
    for (const auto& r : score_cohort(net, rows, *y, {}, a.threads).records) {
      if (r.label == kMissing) continue;
      scores.push_back(r.score);
      labels.push_back(r.label);
    }
  }
  const auto yj = stats::youden_threshold(scores, labels);
  Json doc = {{"threshold", threshold_json(yj.threshold)}, {"J", yj.j}, {"n", scores.size()}};
  out << doc.dump() << '\n';
  return 0;
}

// --- rddo -------------------------------------------------------------------

struct RddoArgs {
  std::string config, model, cohort, out;
  std::optional<std::uint64_t> seed;
  std::optional<int> horizon;
  int threads = 1;
};

int run_rddo(const RddoArgs& a, std::ostream& out) {
  RunConfig cfg = load_config(a.config);
  if (!a.model.empty()) cfg.model = fs::absolute(a.model);
  if (!a.cohort.empty()) cfg.cohort = fs::absolute(a.cohort);
  if (!a.out.empty()) cfg.out = fs::absolute(a.out);
  if (a.seed) cfg.seed = *a.seed;
  if (a.horizon) cfg.horizon = a.horizon;

  DiscreteNetwork net = load_network(cfg.model, cfg.horizon);
  if (cfg.outcome) {
    Outcome o = *cfg.outcome;
    net = DiscreteNetwork(net.variables(), net.cpts(), o);
  }
  require_valid(net);
  if (!net.outcome()) throw ConfigError("no outcome variable: set it in the model or the config");
  const Cohort rows = load_cohort(cfg.cohort, net);
  std::optional<Cohort> validation;
  if (cfg.validation) validation = load_cohort(*cfg.validation, net);

  if (cfg.time_points.empty()) {
    for (std::size_t i = 0; i < net.size(); ++i)
      if (net.is_outcome(i) && net.slice(i) >= 1) cfg.time_points.push_back(net.slice(i));
    std::sort(cfg.time_points.begin(), cfg.time_points.end());
    if (cfg.time_points.empty()) throw ConfigError("the model has no outcome node at t >= 1");
  }
  if (!cfg.covariates) {
    std::vector<std::string> covs;
    for (std::size_t i = 0; i < net.size(); ++i) {
      if (net.slice(i) >= 0 || net.is_outcome(i)) continue;
      bool observed = false;
      for (std::size_t r = 0; r < rows.size() && !observed; ++r) observed = rows.at(r, i) != kMissing;
      if (observed) covs.push_back(net.variable(i).name);
    }
    cfg.covariates = covs;
  }

  RdDoOptions opts;
  opts.time_points = cfg.time_points;
  opts.covariates = *cfg.covariates;
  opts.thresholds = cfg.thresholds;
  opts.variables = cfg.variables;
  opts.modes = cfg.modes;
  opts.scan.alpha = cfg.alpha;
  opts.scan.k_min = cfg.k_min;
  opts.scan.k_step = cfg.k_step;
  opts.scan.k_max = cfg.k_max;
  opts.ks_alpha = cfg.ks_alpha;
  opts.seed = cfg.seed;
  opts.threads = a.threads;
  const auto report = run_rd_do(net, rows, validation ? &*validation : nullptr, opts);

  const Json config_json = to_json(cfg);
  Json manifest = Json::object();
  manifest["tool"] = "causalrd";
  manifest["version"] = kVersion;
  manifest["config"] = config_json;
  manifest["config_hash"] = fnv1a_hex(config_json.dump());
  manifest["seed"] = cfg.seed;
  manifest["threads"] = a.threads;
  Json inputs = Json::object();
  inputs["model"] = fnv1a_hex(read_file(cfg.model));
  inputs["cohort"] = fnv1a_hex(read_file(cfg.cohort));
  if (cfg.validation) inputs["validation"] = fnv1a_hex(read_file(*cfg.validation));
  manifest["input_hashes"] = inputs;
  emit_report(report, cfg.out, manifest);

  for (const auto& tp : report.time_points) {
    out << "t=" << tp.t << ' ' << tp.status;
    if (tp.window) out << " k=" << tp.window->k << " power=" << number_text(tp.window->power);
    out << " tables=" << tp.tables.size() << (tp.best ? " (best)" : "") << '\n';
  }
  out << "wrote " << (cfg.out / "effects.csv").string() << '\n';
  return 0;
}

// --- synth ------------------------------------------------------------------

struct SynthArgs {
  std::string config, out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n;
  int threads = 1;
};

int run_synth(const SynthArgs& a, std::ostream& out) {
  const fs::path cfg_path(a.config);
  ScenarioSpec spec = scenario_from_json(read_json_file(cfg_path), cfg_path.parent_path());
  if (a.seed) spec.seed = *a.seed;
  if (a.n) spec.n = *a.n;
  const auto net = spec.network();
  const auto cohort = sample_cohort(spec, a.threads);

  fs::create_directories(a.out);
  const auto visible = spec.visible_nodes(net);
  save_cohort(fs::path(a.out) / "cohort.csv", cohort, net, visible);
  save_network(fs::path(a.out) / "model.json", net);

  Json cert = Json::object();
  cert["n"] = spec.n;
  cert["seed"] = spec.seed;
  cert["hidden"] = spec.hidden;
  if (spec.certificate) {
    const auto& c = *spec.certificate;
    cert["analytic"] = to_json(c);
    const auto x = net.index_of(c.treatment);
    const auto y = net.index_of(c.outcome);
    const auto xs = net.state_of(x, c.treated_state);
    const double assoc = enumerated_conditional(net, y, x, xs);
    const double causal = true_interventional(net, y, x, xs);
    cert["oracle"] = {{"associational", assoc}, {"interventional", causal}, {"gap", std::abs(assoc - causal)}};
    out << "gap " << number_text(std::abs(assoc - causal)) << " (associational " << number_text(assoc)
        << ", interventional " << number_text(causal) << ")\n";
  }
  write_json_file(fs::path(a.out) / "certificate.json", cert);
  out << "wrote " << spec.n << " rows to " << (fs::path(a.out) / "cohort.csv").string() << '\n';
  return 0;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"causalrd: trial emulation with regression-discontinuity windows and do-queries", "causalrd"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  DiscretizeArgs dz;
  auto* c_dz = app.add_subcommand("discretize", "plausibility filtering and supervised MDL binning");
  c_dz->add_option("--cohort", dz.cohort, "raw cohort CSV")->required();
  c_dz->add_option("--out", dz.out, "output directory")->required();
  c_dz->add_option("--ranges", dz.ranges, "plausibility ranges JSON");
  c_dz->add_option("--label", dz.label, "binary label column used to learn cut points");
  c_dz->add_option("--positive", dz.positive, "label value counted as positive")->capture_default_str();
  c_dz->add_option("--vars", dz.vars, "variables (base names) to bin")->delimiter(',');
  c_dz->add_option("--apply-scheme", dz.apply_scheme, "apply frozen schemes instead of learning");
  c_dz->add_option("--model", dz.model, "model JSON to receive the bins");
  c_dz->add_option("--model-out", dz.model_out, "where to write the updated model");

  LearnArgs ln;
  auto* c_ln = app.add_subcommand("learn", "fit CPTs by EM (MLE on complete data)");
  c_ln->add_option("--model", ln.model, "model JSON (structure)")->required();
  c_ln->add_option("--cohort", ln.cohort, "cohort CSV")->required();
  c_ln->add_option("--out", ln.out, "output directory")->required();
  c_ln->add_option("--horizon", ln.horizon, "unroll horizon for templates");
  c_ln->add_option("--alpha", ln.alpha, "smoothing pseudo-count")->capture_default_str();
  c_ln->add_option("--max-iter", ln.max_iter, "EM iteration cap")->capture_default_str();
  c_ln->add_option("--tol", ln.tol, "EM tolerance on parameter change")->capture_default_str();
  c_ln->add_option("--init", ln.init, "uniform or random")->capture_default_str();
  c_ln->add_option("--seed", ln.seed, "seed for random init and undersampling")->capture_default_str();
  c_ln->add_option("--threads", ln.threads, "worker threads")->capture_default_str();
  c_ln->add_flag("--undersample", ln.undersample, "balance outcome classes 1:1 before fitting");

  InferArgs inf;
  auto* c_inf = app.add_subcommand("infer", "single posterior or do-query");
  c_inf->add_option("--model", inf.model, "model JSON")->required();
  c_inf->add_option("--horizon", inf.horizon, "unroll horizon for templates");
  c_inf->add_option("--target", inf.target, "query node")->required();
  c_inf->add_option("--evidence", inf.evidence, "node=state,...");
  c_inf->add_option("--do", inf.intervention, "node=state intervention");

  ThresholdArgs th;
  auto* c_th = app.add_subcommand("threshold", "Youden threshold");
  c_th->add_option("--scores", th.scores, "file or comma list of scores");
  c_th->add_option("--labels", th.labels, "file or comma list of 0/1 labels");
  c_th->add_option("--model", th.model, "model JSON (score a cohort instead)");
  c_th->add_option("--cohort", th.cohort, "cohort CSV");
  c_th->add_option("--t", th.t, "outcome time point");
  c_th->add_option("--horizon", th.horizon, "unroll horizon for templates");
  c_th->add_option("--threads", th.threads, "worker threads")->capture_default_str();

  RddoArgs rd;
  auto* c_rd = app.add_subcommand("rddo", "full rd-do pipeline");
  c_rd->add_option("--config", rd.config, "run config JSON (or a run manifest)")->required();
  c_rd->add_option("--model", rd.model, "override the model path");
  c_rd->add_option("--cohort", rd.cohort, "override the cohort path");
  c_rd->add_option("--out", rd.out, "override the output directory");
  c_rd->add_option("--seed", rd.seed, "override the seed");
  c_rd->add_option("--horizon", rd.horizon, "override the unroll horizon");
  c_rd->add_option("--threads", rd.threads, "worker threads (never changes outputs)")->capture_default_str();

  SynthArgs sy;
  auto* c_sy = app.add_subcommand("synth", "sample a synthetic cohort with its ground truth");
  c_sy->add_option("--config", sy.config, "scenario JSON")->required();
  c_sy->add_option("--out", sy.out, "output directory")->required();
  c_sy->add_option("--seed", sy.seed, "override the seed");
  c_sy->add_option("--n", sy.n, "override the cohort size");
  c_sy->add_option("--threads", sy.threads, "worker threads")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: " << e.what() << '\n';
    for (auto* sub : {c_dz, c_ln, c_inf, c_th, c_rd, c_sy})
      if (sub->parsed()) {
        err << sub->help();
        return 1;
      }
    err << app.help();
    return 1;
  }

  try {
    if (c_dz->parsed()) return run_discretize(dz, out);
    if (c_ln->parsed()) return run_learn(ln, out);
    if (c_inf->parsed()) return run_infer(inf, out);
    if (c_th->parsed()) return run_threshold(th, out);
    if (c_rd->parsed()) return run_rddo(rd, out);
    if (c_sy->parsed()) return run_synth(sy, out);
  } catch (const ConfigError& e) {
    err << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    err << e.what() << '\n';
    return e.data_error() ? 2 : 1;
  } catch (const fs::filesystem_error& e) {
    err << "filesystem: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "invalid argument: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"causalrd"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace causalrd
