#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "sgev/baselines.hpp"
#include "sgev/evaluation.hpp"
#include "sgev/graph.hpp"
#include "sgev/io.hpp"
#include "sgev/methods.hpp"
#include "sgev/panel.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("sgev_cli_test_" + std::to_string(counter()++));
    fs::create_directories(path);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string cli_path() {
  const char* env = std::getenv("SGEV_CLI_PATH");
  if (env != nullptr && *env != '\0') return env;
#ifdef SGEV_CLI_PATH
  return SGEV_CLI_PATH;
#else
  return {};
#endif
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::string& args, const TempDir& scratch) {
  static int call = 0;
  const fs::path out_file = scratch.path / ("stdout." + std::to_string(call));
  const fs::path err_file = scratch.path / ("stderr." + std::to_string(call));
  ++call;
  const std::string cmd = "\"" + cli_path() + "\" " + args + " >\"" +
                          out_file.string() + "\" 2>\"" + err_file.string() + "\"";
  const int status = std::system(cmd.c_str());
  CliResult r;
  if (WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
  r.out = slurp(out_file);
  r.err = slurp(err_file);
  return r;
}

// Drops "# key = value" lines so outputs written to different directories
// can be compared on their data sections.
std::string strip_meta(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) continue;
    out += line;
    out += '\n';
  }
  return out;
}

bool graphs_identical(const sgev::DependencyGraph& a, const sgev::DependencyGraph& b) {
  if (a.P != b.P || a.edges.size() != b.edges.size()) return false;
  for (std::size_t i = 0; i < a.edges.size(); ++i) {
    if (a.edges[i].src != b.edges[i].src || a.edges[i].dst != b.edges[i].dst) return false;
    if (a.edges[i].score != b.edges[i].score) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("simulate writes a reproducible dataset") {
  REQUIRE(!cli_path().empty());
  TempDir dir;
  const std::string base =
      "simulate --seed 11 --series 4 --steps 24 --lag 2 --out ";

  const CliResult first = run_cli(base + dir.file("d1"), dir);
  REQUIRE(first.exit_code == 0);
  CHECK(first.out.find("simulated 24 steps of 4 series") != std::string::npos);

  const sgev::TimeSeriesPanel panel = sgev::read_panel_csv(dir.file("d1/panel.csv"));
  CHECK(panel.steps() == 24);
  CHECK(panel.series() == 4);
  CHECK(panel.values.allFinite());
  const std::string csv = slurp(dir.file("d1/panel.csv"));
  CHECK(csv.find("# command = simulate") != std::string::npos);
  CHECK(csv.find("# seed = 11") != std::string::npos);

  const json truth = json::parse(slurp(dir.file("d1/truth.json")));
  CHECK(truth.contains("config"));
  CHECK(truth["config"]["command"] == "simulate");
  const json model = json::parse(slurp(dir.file("d1/model.json")));
  CHECK(model["P"] == 4);
  CHECK(model["L"] == 2);

  // Meta lines echo the output directory, so compare the data sections.
  const CliResult second = run_cli(base + dir.file("d2"), dir);
  REQUIRE(second.exit_code == 0);
  CHECK(strip_meta(slurp(dir.file("d1/panel.csv"))) ==
        strip_meta(slurp(dir.file("d2/panel.csv"))));
  json m1 = json::parse(slurp(dir.file("d1/model.json")));
  json m2 = json::parse(slurp(dir.file("d2/model.json")));
  m1.erase("config");
  m2.erase("config");
  CHECK(m1.dump() == m2.dump());

  const CliResult shifted = run_cli(
      "simulate --seed 12 --series 4 --steps 24 --lag 2 --out " + dir.file("d3"), dir);
  REQUIRE(shifted.exit_code == 0);
  CHECK(strip_meta(slurp(dir.file("d1/panel.csv"))) !=
        strip_meta(slurp(dir.file("d3/panel.csv"))));
}

TEST_CASE("fit granger through the binary matches the library") {
  REQUIRE(!cli_path().empty());
  TempDir dir;
  REQUIRE(run_cli("simulate --seed 5 --series 4 --steps 30 --lag 1 --out " +
                      dir.file("data"),
                  dir)
              .exit_code == 0);

  const CliResult fit = run_cli(
      "fit --input " + dir.file("data/panel.csv") +
          " --method granger --lambda 0.08 --lag 1 --out " + dir.file("fit"),
      dir);
  REQUIRE(fit.exit_code == 0);
  CHECK(fit.out.find("fit granger") != std::string::npos);

  const json stored = json::parse(slurp(dir.file("fit/graph.json")));
  CHECK(stored["config"]["method"] == "granger");
  const sgev::DependencyGraph from_cli = sgev::graph_from_json(stored);

  const sgev::TimeSeriesPanel raw = sgev::read_panel_csv(dir.file("data/panel.csv"));
  const auto [panel, record] = sgev::normalize_panel(raw);
  (void)record;
  sgev::RunSettings settings;
  settings.lag = 1;
  settings.lambda_granger = 0.08;
  const sgev::MethodOutput direct = sgev::make_method("granger", settings).run(panel, 0);
  CHECK(graphs_identical(from_cli, direct.graph));

  // Skipping normalization changes the fitted scores.
  const CliResult rawfit = run_cli(
      "fit --input " + dir.file("data/panel.csv") +
          " --method granger --lambda 0.08 --lag 1 --no-normalize --out " +
          dir.file("rawfit"),
      dir);
  REQUIRE(rawfit.exit_code == 0);
  const sgev::DependencyGraph unscaled =
      sgev::graph_from_json(json::parse(slurp(dir.file("rawfit/graph.json"))));
  CHECK(!graphs_identical(unscaled, direct.graph));
}

TEST_CASE("latent fit then predict round trips through files") {
  REQUIRE(!cli_path().empty());
  TempDir dir;
  REQUIRE(run_cli("simulate --seed 2 --series 3 --steps 14 --lag 1 --out " +
                      dir.file("data"),
                  dir)
              .exit_code == 0);

  const CliResult fit = run_cli(
      "fit --input " + dir.file("data/panel.csv") +
          " --method sparse-gev --lag 1 --particles 200 --seed 4 --out " +
          dir.file("fit"),
      dir);
  REQUIRE(fit.exit_code == 0);
  CHECK(fit.out.find("fit sparse-gev") != std::string::npos);
  CHECK(fit.out.find("path roughness ratio") != std::string::npos);

  const json model = json::parse(slurp(dir.file("fit/model.json")));
  CHECK(model.contains("normalization"));
  CHECK(model["config"]["method"] == "sparse-gev");
  const std::string trace = slurp(dir.file("fit/em_trace.csv"));
  CHECK(trace.find("iter,q,penalized_q") != std::string::npos);
  CHECK(fs::exists(dir.file("fit/graph.json")));
  CHECK(fs::exists(dir.file("fit/ess_trace.csv")));

  const CliResult predict = run_cli(
      "predict --input " + dir.file("data/panel.csv") + " --model " +
          dir.file("fit/model.json") + " --particles 200 --seed 4 --out " +
          dir.file("pred"),
      dir);
  REQUIRE(predict.exit_code == 0);
  CHECK(predict.out.find("one-step predictions") != std::string::npos);

  const sgev::TimeSeriesPanel raw = sgev::read_panel_csv(dir.file("data/panel.csv"));
  const sgev::TimeSeriesPanel forecast =
      sgev::read_panel_csv(dir.file("pred/predictions.csv"));
  CHECK(forecast.steps() == 1);
  CHECK(forecast.series() == 3);
  CHECK(forecast.values.allFinite());
  CHECK(forecast.names == raw.names);
  // The forecast time stamp lands in the meta lines: one step past the input.
  CHECK(slurp(dir.file("pred/predictions.csv")).find("# forecast_t0 = 14") !=
        std::string::npos);

  // Same command, same seed: identical forecast values.
  REQUIRE(run_cli("predict --input " + dir.file("data/panel.csv") + " --model " +
                      dir.file("fit/model.json") + " --particles 200 --seed 4 --out " +
                      dir.file("pred2"),
                  dir)
              .exit_code == 0);
  CHECK(strip_meta(slurp(dir.file("pred/predictions.csv"))) ==
        strip_meta(slurp(dir.file("pred2/predictions.csv"))));
}

TEST_CASE("usage problems exit with status one") {
  REQUIRE(!cli_path().empty());
  TempDir dir;

  const CliResult bare = run_cli("", dir);
  CHECK(bare.exit_code == 1);
  CHECK(bare.err.find("sgev: error: usage:") != std::string::npos);

  const CliResult no_input = run_cli("fit --method granger", dir);
  CHECK(no_input.exit_code == 1);
  CHECK(no_input.err.find("sgev: error: usage:") != std::string::npos);
  CHECK(no_input.err.find("--input") != std::string::npos);

  const CliResult bad_tau =
      run_cli("fit --input whatever.csv --tau -3", dir);
  CHECK(bad_tau.exit_code == 1);
  CHECK(bad_tau.err.find("--tau must be positive") != std::string::npos);

  const CliResult bad_marginal =
      run_cli("fit --input whatever.csv --marginal cauchy", dir);
  CHECK(bad_marginal.exit_code == 1);
  CHECK(bad_marginal.err.find("sgev: error: usage:") != std::string::npos);
}

TEST_CASE("data problems exit with status two") {
  REQUIRE(!cli_path().empty());
  TempDir dir;

  const CliResult missing = run_cli(
      "fit --method granger --input " + dir.file("absent.csv"), dir);
  CHECK(missing.exit_code == 2);
  CHECK(missing.err.find("sgev: error: io:") != std::string::npos);

  REQUIRE(run_cli("simulate --seed 8 --series 3 --steps 20 --lag 1 --out " +
                      dir.file("data"),
                  dir)
              .exit_code == 0);
  spit(dir.file("garbage.json"), "this is not json\n");
  const CliResult bad_truth = run_cli(
      "evaluate --input " + dir.file("data/panel.csv") + " --truth " +
          dir.file("garbage.json") + " --methods granger --windows 2 --lag 1",
      dir);
  CHECK(bad_truth.exit_code == 2);
  CHECK(bad_truth.err.find("sgev: error: parse:") != std::string::npos);
}

TEST_CASE("numeric problems exit with status three") {
  REQUIRE(!cli_path().empty());
  TempDir dir;
  const json bad_model = {
      {"P", 1},         {"L", 1},
      {"tau", -1.0},    {"c", json::array({0.0})},
      {"sigma", json::array({0.1})},
      {"beta", json::array({json::array({json::array({0.2})})})}};
  spit(dir.file("bad_model.json"), bad_model.dump(2));
  const CliResult r = run_cli(
      "predict --input " + dir.file("unused.csv") + " --model " +
          dir.file("bad_model.json"),
      dir);
  CHECK(r.exit_code == 3);
  CHECK(r.err.find("sgev: error: domain:") != std::string::npos);
}

TEST_CASE("config files fill unset flags and the command line wins") {
  REQUIRE(!cli_path().empty());
  TempDir dir;
  spit(dir.file("cfg.json"), R"({"seed": 21, "steps": 26})");

  const CliResult merged = run_cli(
      "simulate --config " + dir.file("cfg.json") +
          " --seed 4 --series 3 --lag 1 --out " + dir.file("merged"),
      dir);
  REQUIRE(merged.exit_code == 0);
  const json truth = json::parse(slurp(dir.file("merged/truth.json")));
  CHECK(truth["config"]["seed"] == 4);    // flag beats config
  CHECK(truth["config"]["steps"] == 26);  // config fills the gap

  const CliResult direct = run_cli(
      "simulate --seed 4 --series 3 --steps 26 --lag 1 --out " + dir.file("direct"),
      dir);
  REQUIRE(direct.exit_code == 0);
  const sgev::TimeSeriesPanel a = sgev::read_panel_csv(dir.file("merged/panel.csv"));
  const sgev::TimeSeriesPanel b = sgev::read_panel_csv(dir.file("direct/panel.csv"));
  CHECK(a.values == b.values);
}

TEST_CASE("config files reject unknown keys and wrong types") {
  REQUIRE(!cli_path().empty());
  TempDir dir;

  spit(dir.file("extra.json"), R"({"sneed": 1})");
  const CliResult unknown =
      run_cli("simulate --config " + dir.file("extra.json"), dir);
  CHECK(unknown.exit_code == 1);
  CHECK(unknown.err.find("unknown config key 'sneed'") != std::string::npos);

  spit(dir.file("typed.json"), R"({"lag": "two"})");
  const CliResult mistyped =
      run_cli("simulate --config " + dir.file("typed.json"), dir);
  CHECK(mistyped.exit_code == 1);
  CHECK(mistyped.err.find("'lag' must be an integer") != std::string::npos);

  spit(dir.file("broken.json"), "{");
  const CliResult unparsable =
      run_cli("simulate --config " + dir.file("broken.json"), dir);
  CHECK(unparsable.exit_code == 1);
}

TEST_CASE("evaluate reports the requested methods") {
  REQUIRE(!cli_path().empty());
  TempDir dir;
  REQUIRE(run_cli("simulate --seed 9 --series 4 --steps 26 --lag 1 --out " +
                      dir.file("data"),
                  dir)
              .exit_code == 0);

  const CliResult eval = run_cli(
      "evaluate --input " + dir.file("data/panel.csv") + " --truth " +
          dir.file("data/truth.json") +
          " --methods granger --windows 3 --lag 1 --out " + dir.file("eval"),
      dir);
  REQUIRE(eval.exit_code == 0);
  CHECK(eval.out.find("granger") != std::string::npos);
  CHECK(eval.out.find("# datasets:") != std::string::npos);

  const json report = json::parse(slurp(dir.file("eval/report.json")));
  REQUIRE(report["cells"].size() == 1);
  CHECK(report["cells"][0]["method"] == "granger");
  CHECK(report["cells"][0]["auc"].is_number());
  CHECK(report["cells"][0]["rmse"].is_number());
  CHECK(!report["cells"][0].contains("wall_seconds"));
  REQUIRE(report["summary"].size() == 1);
  CHECK(report["summary"][0]["method"] == "granger");
  CHECK(report["config"]["command"] == "evaluate");
  CHECK(slurp(dir.file("eval/report.txt")).find("# datasets:") != std::string::npos);

  // Without a truth file the report carries predictions only.
  const CliResult no_truth = run_cli(
      "evaluate --input " + dir.file("data/panel.csv") +
          " --methods granger --windows 3 --lag 1 --out " + dir.file("noauc"),
      dir);
  REQUIRE(no_truth.exit_code == 0);
  const json pred_only = json::parse(slurp(dir.file("noauc/report.json")));
  CHECK(pred_only["cells"][0]["auc"].is_null());
  CHECK(pred_only["cells"][0]["rmse"].is_number());
}

TEST_CASE("benchmark reruns are byte stable") {
  REQUIRE(!cli_path().empty());
  TempDir dir;
  const std::string cmd =
      "benchmark --datasets 1 --methods granger --windows 2 --seed 6 --lag 1 --out " +
      dir.file("bench");

  REQUIRE(run_cli(cmd, dir).exit_code == 0);
  const std::string first = slurp(dir.file("bench/report.json"));
  REQUIRE(run_cli(cmd, dir).exit_code == 0);
  const std::string second = slurp(dir.file("bench/report.json"));
  CHECK(first == second);

  const json report = json::parse(first);
  CHECK(report["cells"][0]["dataset"] == "synthetic-1");
  CHECK(report["config"]["datasets"] == 1);
  CHECK(!report["cells"][0].contains("wall_seconds"));

  const CliResult timed = run_cli(cmd + "t --timings", dir);
  REQUIRE(timed.exit_code == 0);
  const json with_timing = json::parse(slurp(dir.file("bencht/report.json")));
  CHECK(with_timing["cells"][0]["wall_seconds"].is_number());
}
