#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout only
};

RunResult run_cli(const std::string& arguments) {
  const std::string command = std::string(ROBUSTCF_CLI_PATH) + " " + arguments;
  std::array<char, 4096> buffer{};
  RunResult result;
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::size_t n = 0;
  while ((n = fread(buffer.data(), 1, buffer.size(), pipe)) > 0) {
    result.output.append(buffer.data(), n);
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string slurp(const fs::path& path) {
  std::ifstream file(path);
  REQUIRE(file.good());
  std::stringstream buffer;
  buffer << file.rdbuf();
  return buffer.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("robustcf_cli_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("unknown flags are a usage error with exit code 2") {
  CHECK(run_cli("explain --no-such-flag 2>/dev/null").exit_code == 2);
  CHECK(run_cli("2>/dev/null").exit_code == 2);  // missing subcommand
  CHECK(run_cli("--help >/dev/null 2>&1").exit_code == 0);
}

TEST_CASE("explain on a synthetic ball dataset returns capped valid counterfactuals") {
  TempDir dir;
  const std::string out = dir.file("explanation.json");
  const RunResult run = run_cli("explain --dataset synth:ball:200 --model ball:0.3 "
                                "--input-index 0 --seed 1 --out " + out);
  REQUIRE(run.exit_code == 0);
  const json doc = json::parse(slurp(out));
  CHECK(doc.at("schema_version") == 1);
  CHECK(doc.at("status") == "ok");
  const auto& items = doc.at("counterfactuals");
  REQUIRE(!items.empty());
  CHECK(items.size() <= 5);
  const int reference_label = doc.at("reference_label").get<int>();
  for (const json& item : items) {
    // the ball model labels by Euclidean distance from (0.5, 0.5)
    const auto p = item.at("point").get<std::vector<double>>();
    const double dx = p[0] - 0.5, dy = p[1] - 0.5;
    const int label = (std::sqrt(dx * dx + dy * dy) <= 0.3) ? 1 : 0;
    CHECK(label != reference_label);
    CHECK(item.contains("safety_margin"));  // analytic model, native metric
  }
}

TEST_CASE("explain runs are byte-identical for a fixed seed") {
  TempDir dir;
  const std::string out_a = dir.file("a.json");
  const std::string out_b = dir.file("b.json");
  const std::string args = "explain --dataset synth:diamond:150 --model diamond:0.35 "
                           "--metric l1 --input-index 3 --seed 7 --out ";
  REQUIRE(run_cli(args + out_a).exit_code == 0);
  REQUIRE(run_cli(args + out_b).exit_code == 0);
  CHECK(slurp(out_a) == slurp(out_b));
}

TEST_CASE("explain works on a csv fixture with a trained mlp") {
  TempDir dir;
  const std::string out = dir.file("fixture.json");
  const std::string fixture = std::string(ROBUSTCF_FIXTURE_DIR) + "/tiny.csv";
  const RunResult run = run_cli("explain --dataset " + fixture +
                                " --model mlp --epochs 40 --input-index 1 --seed 5 --out " + out);
  REQUIRE(run.exit_code == 0);
  const json doc = json::parse(slurp(out));
  CHECK(doc.at("status") == "ok");
  CHECK(!doc.at("counterfactuals").empty());
}

TEST_CASE("missing dataset file fails with a nonzero exit") {
  const RunResult run = run_cli("explain --dataset /nonexistent.csv --model ball:0.3 "
                                "2>/dev/null");
  CHECK(run.exit_code == 1);
}

TEST_CASE("verify reports zero violations on the halfspace scenario") {
  const RunResult run = run_cli("verify --scenario halfspace --grid 21 --eps 0.2");
  CHECK(run.exit_code == 0);
  CHECK(run.output.find("violations: 0") != std::string::npos);
}

TEST_CASE("verify with fault injection reports violations and exits nonzero") {
  const RunResult run =
      run_cli("verify --scenario halfspace --grid 15 --eps 0.2 --inject-fault 2>/dev/null");
  CHECK(run.exit_code == 1);
}

TEST_CASE("demo emits the antipodal counterexample data") {
  TempDir dir;
  const std::string prefix = dir.file("demo");
  const RunResult run = run_cli("demo --r 1.0 --gap 0.01 --seed 2 --out " + prefix);
  REQUIRE(run.exit_code == 0);

  const std::string summary = slurp(prefix + "_summary.csv");
  double singleton = 0.0;
  std::istringstream lines(summary);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.rfind("singleton_set_distance_max,", 0) == 0) {
      singleton = std::stod(line.substr(line.find(',') + 1));
    }
  }
  // 2r within twice the bisection accuracy
  CHECK(singleton >= 2.0 - 0.002);
  CHECK(singleton <= 2.0 + 0.002);

  const std::string points = slurp(prefix + "_points.csv");
  CHECK(points.find("role,x0,x1") != std::string::npos);
  CHECK(points.find("pipeline_cf_x1") != std::string::npos);

  // determinism of emitted files
  TempDir dir2;
  const std::string prefix2 = dir2.file("demo");
  REQUIRE(run_cli("demo --r 1.0 --gap 0.01 --seed 2 --out " + prefix2).exit_code == 0);
  CHECK(slurp(prefix2 + "_summary.csv") == summary);
  CHECK(slurp(prefix2 + "_points.csv") == points);
}

TEST_CASE("evaluate writes csv and json reports, byte-identical without timing") {
  TempDir dir;
  const std::string prefix_a = dir.file("report_a");
  const std::string prefix_b = dir.file("report_b");
  const std::string args = "evaluate --dataset synth:two_gaussians:120 --model mlp "
                           "--epochs 20 --inputs 4 --reps 2 --seed 3 --timing omit --out ";
  REQUIRE(run_cli(args + prefix_a).exit_code == 0);
  REQUIRE(run_cli(args + prefix_b).exit_code == 0);

  CHECK(slurp(prefix_a + ".json") == slurp(prefix_b + ".json"));
  CHECK(slurp(prefix_a + ".csv") == slurp(prefix_b + ".csv"));

  const json doc = json::parse(slurp(prefix_a + ".json"));
  CHECK(doc.at("schema_version") == 1);
  REQUIRE(doc.at("methods").size() == 2);
  CHECK(doc.at("methods")[0].at("method") == "diverse_set");
  CHECK(doc.at("methods")[1].at("method") == "singleton_nearest");

  const std::string csv = slurp(prefix_a + ".csv");
  CHECK(csv.find("method,dataset,metric,mean,std") != std::string::npos);
  CHECK(csv.find("wall_time_ms") == std::string::npos);  // timing omitted
}
