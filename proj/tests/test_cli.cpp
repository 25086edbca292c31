#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "dronecast/scenario_io.hpp"

namespace fs = std::filesystem;
using Catch::Matchers::ContainsSubstring;

namespace {

const std::string kCli = DRONECAST_CLI_PATH;
const std::string kScenarioDir = DRONECAST_SCENARIO_DIR;
const std::string kGoldenDir = DRONECAST_GOLDEN_DIR;

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "dronecast_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  std::stringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += (c == '\n');
  return n;
}

CliResult run_cli(const std::string& args) {
  static int invocation = 0;
  fs::path dir = fresh_dir("streams_" + std::to_string(invocation++));
  fs::path out_file = dir / "stdout.txt";
  fs::path err_file = dir / "stderr.txt";
  std::string cmd =
      kCli + " " + args + " >" + out_file.string() + " 2>" + err_file.string();
  int status = std::system(cmd.c_str());
  CliResult r;
  if (WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
  r.out = read_file(out_file);
  r.err = read_file(err_file);
  return r;
}

}  // namespace

TEST_CASE("run reproduces the golden hover summary", "[cli]") {
  fs::path out = fresh_dir("hover_run");
  CliResult r = run_cli("run --scenario " + kScenarioDir + "/hover_100m.json --out " +
                        out.string());
  CAPTURE(r.err);
  REQUIRE(r.exit_code == 0);
  CHECK_THAT(r.out, ContainsSubstring("450 generated, 450 delivered, 0 dropped"));
  CHECK_THAT(r.out, ContainsSubstring("goodput_bps: 1.49299e+09"));

  std::string summary = read_file(out / "summary.json");
  CHECK(summary == read_file(kGoldenDir + "/hover_100m_summary.json"));
  // 60 s at 10 ms sampling: header + 6000 rows
  CHECK(count_lines(read_file(out / "steps.csv")) == 6001);
}

TEST_CASE("run output is byte-stable across invocations", "[cli]") {
  fs::path out1 = fresh_dir("stable_a");
  fs::path out2 = fresh_dir("stable_b");
  std::string base = "run --scenario " + kScenarioDir + "/flyby_tracking.json";
  REQUIRE(run_cli(base + " --out " + out1.string()).exit_code == 0);
  REQUIRE(run_cli(base + " --out " + out2.string()).exit_code == 0);
  CHECK(read_file(out1 / "summary.json") == read_file(out2 / "summary.json"));
  CHECK(read_file(out1 / "steps.csv") == read_file(out2 / "steps.csv"));
  CHECK(read_file(out1 / "summary.json") ==
        read_file(kGoldenDir + "/flyby_tracking_summary.json"));
}

TEST_CASE("run reproduces the golden overload summary", "[cli]") {
  fs::path out = fresh_dir("overload_run");
  CliResult r = run_cli("run --scenario " + kScenarioDir + "/hover_100m_60fps.json --out " +
                        out.string());
  CAPTURE(r.err);
  REQUIRE(r.exit_code == 0);
  CHECK(read_file(out / "summary.json") ==
        read_file(kGoldenDir + "/hover_100m_60fps_summary.json"));
}

TEST_CASE("run honors a dt override", "[cli]") {
  fs::path out = fresh_dir("dt_override");
  CliResult r = run_cli("run --scenario " + kScenarioDir + "/hover_100m.json --dt 0.02 --out " +
                        out.string());
  REQUIRE(r.exit_code == 0);
  CHECK(count_lines(read_file(out / "steps.csv")) == 3001);

  CliResult bad = run_cli("run --scenario " + kScenarioDir +
                          "/hover_100m.json --dt -0.5 --out " + out.string());
  CHECK(bad.exit_code == 1);
}

TEST_CASE("run fails cleanly when the output directory cannot be created", "[cli]") {
  fs::path dir = fresh_dir("blocked");
  { std::ofstream f(dir / "blocker"); f << "x"; }
  CliResult r = run_cli("run --scenario " + kScenarioDir + "/hover_100m.json --out " +
                        (dir / "blocker" / "sub").string());
  CHECK(r.exit_code == 2);
  CHECK_FALSE(fs::exists(dir / "blocker" / "sub"));
}

TEST_CASE("run with Monte Carlo detection requires a seed", "[cli]") {
  fs::path out = fresh_dir("mc");
  CliResult r = run_cli("run --scenario " + kScenarioDir +
                        "/flyby_tracking.json --detection-mode monte-carlo --out " + out.string());
  CHECK(r.exit_code == 1);
  CHECK_THAT(r.err, ContainsSubstring("--seed"));

  CliResult ok = run_cli("run --scenario " + kScenarioDir +
                         "/flyby_tracking.json --detection-mode monte-carlo --seed 42 --out " +
                         out.string());
  REQUIRE(ok.exit_code == 0);
  auto j = nlohmann::json::parse(read_file(out / "summary.json"));
  REQUIRE(j.contains("detections_per_delivered_frame"));
  double first = j["detections_per_delivered_frame"].get<double>();

  // same seed, same answer
  REQUIRE(run_cli("run --scenario " + kScenarioDir +
                  "/flyby_tracking.json --detection-mode monte-carlo --seed 42 --out " +
                  out.string())
              .exit_code == 0);
  auto j2 = nlohmann::json::parse(read_file(out / "summary.json"));
  CHECK(j2["detections_per_delivered_frame"].get<double>() == first);
}

TEST_CASE("validate accepts the shipped scenarios", "[cli]") {
  for (std::string name : {"hover_100m", "hover_100m_60fps", "flyby_tracking"}) {
    CliResult r = run_cli("validate --scenario " + kScenarioDir + "/" + name + ".json");
    CAPTURE(name, r.err);
    CHECK(r.exit_code == 0);
    CHECK_THAT(r.out, ContainsSubstring("OK"));
  }
}

TEST_CASE("validate rejects broken scenarios with a pointed message", "[cli]") {
  fs::path dir = fresh_dir("validate_bad");
  fs::path bad = dir / "bad.json";
  {
    std::ifstream src(kScenarioDir + "/hover_100m.json");
    std::stringstream buf;
    buf << src.rdbuf();
    std::string doc = buf.str();
    auto pos = doc.find("\"fps\": 7.5");
    REQUIRE(pos != std::string::npos);
    doc.replace(pos, 10, "\"fps\": -1");
    std::ofstream f(bad);
    f << doc;
  }
  // the copy lives outside the scenario dir, so point at the table explicitly
  CliResult r = run_cli("validate --scenario " + bad.string() + " --mcs-table " + kScenarioDir +
                        "/mcs_80211ad_sc.csv");
  CHECK(r.exit_code == 1);
  CHECK_THAT(r.err, ContainsSubstring("VideoProfile.fps"));

  CliResult missing = run_cli("validate --scenario " + (dir / "nope.json").string());
  CHECK(missing.exit_code == 2);
}

TEST_CASE("distance-curve reproduces the golden sweep", "[cli]") {
  fs::path out = fresh_dir("curve");
  CliResult r = run_cli("distance-curve --config " + kScenarioDir + "/fig5_sweep.json --out " +
                        out.string());
  CAPTURE(r.err);
  REQUIRE(r.exit_code == 0);
  std::string csv = read_file(out / "distance_curve.csv");
  CHECK(csv == read_file(kGoldenDir + "/fig5_distance_curve.csv"));
  CHECK_THAT(csv, ContainsSubstring("17.5,21,21.4898"));
  CHECK_THAT(csv, ContainsSubstring("25.4,21,132.505"));
}

TEST_CASE("distance-curve output does not depend on the job count", "[cli]") {
  fs::path out1 = fresh_dir("curve_j1");
  fs::path out3 = fresh_dir("curve_j3");
  std::string base = "distance-curve --config " + kScenarioDir + "/fig5_sweep.json";
  REQUIRE(run_cli(base + " --jobs 1 --out " + out1.string()).exit_code == 0);
  REQUIRE(run_cli(base + " --jobs 3 --out " + out3.string()).exit_code == 0);
  CHECK(read_file(out1 / "distance_curve.csv") == read_file(out3 / "distance_curve.csv"));
}

TEST_CASE("distance-curve flags override the config file", "[cli]") {
  fs::path out = fresh_dir("curve_override");
  CliResult r = run_cli("distance-curve --config " + kScenarioDir +
                        "/fig5_sweep.json --snr-min 21 --snr-max 21 --out " + out.string());
  REQUIRE(r.exit_code == 0);
  // two gains, one SNR point each
  CHECK(count_lines(read_file(out / "distance_curve.csv")) == 3);
}

TEST_CASE("distance-curve rejects a descending SNR range", "[cli]") {
  fs::path out = fresh_dir("curve_desc");
  CliResult r = run_cli("distance-curve --gains 17.5 --snr-min 10 --snr-max 5 --out " +
                        out.string());
  CHECK(r.exit_code == 1);
  CHECK_THAT(r.err, ContainsSubstring("ascending"));
  CHECK_FALSE(fs::exists(out / "distance_curve.csv"));
}

TEST_CASE("distance-curve marks unreachable targets instead of failing", "[cli]") {
  fs::path out = fresh_dir("curve_unreachable");
  // a target this far above the d->0 limit underflows the closed form
  CliResult r = run_cli("distance-curve --gains 0 --snr-min 100000 --snr-max 100000 --out " +
                        out.string());
  REQUIRE(r.exit_code == 0);
  CHECK_THAT(read_file(out / "distance_curve.csv"), ContainsSubstring("0,100000,unreachable"));
}

TEST_CASE("detection-compare reproduces the golden comparison", "[cli]") {
  fs::path out = fresh_dir("compare");
  CliResult r = run_cli("detection-compare --scene " + kScenarioDir + "/faces136.json --out " +
                        out.string());
  CAPTURE(r.err);
  REQUIRE(r.exit_code == 0);
  std::string csv = read_file(out / "detection_compare.csv");
  CHECK(csv == read_file(kGoldenDir + "/faces136_detection_compare.csv"));
  CHECK_THAT(csv, ContainsSubstring("2k,1920,45.5,1"));
  CHECK_THAT(csv, ContainsSubstring("4k,3840,86.2,1.89451"));
}

TEST_CASE("detection-compare sampling is seed-deterministic", "[cli]") {
  fs::path out1 = fresh_dir("compare_s1");
  fs::path out2 = fresh_dir("compare_s2");
  std::string base = "detection-compare --scene " + kScenarioDir + "/faces136.json --seed 7";
  REQUIRE(run_cli(base + " --out " + out1.string()).exit_code == 0);
  REQUIRE(run_cli(base + " --out " + out2.string()).exit_code == 0);
  std::string csv = read_file(out1 / "detection_compare.csv");
  CHECK(csv == read_file(out2 / "detection_compare.csv"));
  CHECK_THAT(csv, ContainsSubstring("sampled_detections"));
}

TEST_CASE("usage errors exit with the validation code", "[cli]") {
  CHECK(run_cli("").exit_code == 1);                    // a subcommand is required
  CHECK(run_cli("run").exit_code == 1);                 // --scenario is required
  CHECK(run_cli("frobnicate").exit_code == 1);          // unknown subcommand
  CHECK(run_cli("run --scenario x --bogus").exit_code == 1);
  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("run --help").exit_code == 0);
}
