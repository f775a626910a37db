#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "causalrd/cli.hpp"
#include "causalrd/model_io.hpp"
#include "causalrd/report_io.hpp"
#include "doctest.h"

using namespace causalrd;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void put(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("causalrd_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit 1, help exits 0") {
    CHECK(run({}).code == 1);
    CHECK(run({"infer"}).code == 1);
    CHECK(run({"bogus"}).code == 1);
    CHECK(run({"--help"}).code == 0);
    CHECK(run({"rddo", "--config", "/nonexistent/config.json"}).code == 1);
  }

  TEST_CASE("synth, learn, infer, threshold and rddo end to end") {
    TempDir tmp("cli");
    const auto d = tmp.path;
    put(d / "scenario.json", R"({"scenario":"confounded","bias":0.12,"n":4000,"seed":11})");
    auto r = run({"synth", "--config", (d / "scenario.json").string(), "--out", (d / "syn").string()});
    REQUIRE(r.code == 0);
    const auto cert = read_json_file(d / "syn" / "certificate.json");
    CHECK(cert["oracle"]["interventional"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));

    r = run({"infer", "--model", (d / "syn" / "model.json").string(), "--target", "y@1", "--do", "x@0=1"});
    REQUIRE(r.code == 0);
    CHECK(Json::parse(r.out)["probabilities"]["1"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
    r = run({"infer", "--model", (d / "syn" / "model.json").string(), "--target", "nope"});
    CHECK(r.code == 2);
    CHECK(r.err.find("UnknownVariable") != std::string::npos);

    r = run({"threshold", "--scores", "0.1,0.2,0.8,0.9", "--labels", "0,0,1,1"});
    REQUIRE(r.code == 0);
    CHECK(Json::parse(r.out)["threshold"].get<double>() == 0.5);
    CHECK(run({"threshold", "--scores", "0.1,x", "--labels", "0,1"}).code == 2);

    r = run({"learn", "--model", (d / "syn" / "model.json").string(), "--cohort", (d / "syn" / "cohort.csv").string(),
             "--out", (d / "fit").string(), "--init", "random", "--seed", "3", "--max-iter", "5"});
    REQUIRE(r.code == 0);
    CHECK(fs::exists(d / "fit" / "model.json"));
    CHECK(read_json_file(d / "fit" / "fit_report.json")["log_likelihood"].size() >= 2);

    put(d / "run.json", R"({"model":"syn/model.json","cohort":"syn/cohort.csv","covariates":["sex","age@entry"],
                            "time_points":[1],"k_min":100,"seed":5,"out":"out1"})");
    r = run({"rddo", "--config", (d / "run.json").string()});
    REQUIRE(r.code == 0);
    const auto effects = slurp(d / "out1" / "effects.csv");
    CHECK(effects.substr(0, effects.find('\n')) == kEffectsHeader);
    CHECK(effects.substr(0, effects.find('\n')) == "variable,t,mode,category,n,mean,std,ks_min_p,significant,rank");
    CHECK(fs::exists(d / "out1" / "timepoints.csv"));

    // rerun from the manifest with more threads: identical bytes
    r = run({"rddo", "--config", (d / "out1" / "run_manifest.json").string(), "--out", (d / "out2").string(),
             "--threads", "3"});
    REQUIRE(r.code == 0);
    CHECK(slurp(d / "out2" / "effects.csv") == effects);

    put(d / "bad.json", R"({"model":"syn/model.json","cohort":"syn/cohort.csv","colour":"red"})");
    r = run({"rddo", "--config", (d / "bad.json").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("colour") != std::string::npos);
  }

  TEST_CASE("discretize learns, applies and reuses schemes") {
    TempDir tmp("disc");
    const auto d = tmp.path;
    put(d / "raw.csv", "id,egfr@0,label\na,10,0\nb,12,0\nc,11,0\nd,90,1\ne,95,1\nf,99,1\ng,5000,1\nh,,0\n");
    put(d / "ranges.json", R"({"ranges":[{"name":"egfr","min":0,"max":200}]})");
    auto r = run({"discretize", "--cohort", (d / "raw.csv").string(), "--ranges", (d / "ranges.json").string(),
                  "--label", "label", "--out", (d / "b").string()});
    REQUIRE(r.code == 0);
    const auto schemes = read_json_file(d / "b" / "schemes.json");
    CHECK(schemes["schemes"][0]["cuts"] == Json::array({51}));
    const auto binned = parse_csv(slurp(d / "b" / "binned.csv"), "binned");
    CHECK(binned.rows[0][1] == "<51");
    CHECK(binned.rows[3][1] == ">=51");
    CHECK(binned.rows[6][1].empty());
    CHECK(slurp(d / "b" / "plausibility_log.csv").find("5000") != std::string::npos);

    r = run({"discretize", "--cohort", (d / "raw.csv").string(), "--apply-scheme", (d / "b" / "schemes.json").string(),
             "--out", (d / "c").string()});
    REQUIRE(r.code == 0);
    CHECK(parse_csv(slurp(d / "c" / "binned.csv"), "c").rows[6][1] == ">=51");
    CHECK(run({"discretize", "--cohort", (d / "raw.csv").string(), "--out", (d / "e").string()}).code == 1);
  }
}
