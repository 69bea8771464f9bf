#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "hlab/experiments.hpp"
#include "hlab/presets.hpp"

using namespace hlab;
namespace fs = std::filesystem;

namespace {

std::string parse_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ParseError);
    return e.what();
  }
  FAIL("config parsed: " << text);
  return {};
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hlab_test_" + name);
  fs::remove_all(p);
  return p;
}

const char* kConfig = R"({
  "scenario": {"preset": "schottky-2"},
  "seed": 3,
  "experiments": [
    {"name": "metric-axioms", "samples": 300},
    {"name": "orbit-ball", "radius": 8},
    {"name": "ps-measure", "radius": 9, "delta": 0.75},
    {"name": "orbit-count", "radii": [5, 6, 7], "delta": 0.75},
    {"name": "distance", "samples": 20}
  ]
})";

ExperimentReport run_to(const std::string& text, const fs::path& dir, int threads) {
  RunOverrides ov;
  ov.threads = threads;
  ov.out_dir = dir.string();
  std::ostringstream log;
  return run_experiments(parse_config(text), ov, log);
}

}  // namespace

TEST_CASE("syntax errors report line and column") {
  const std::string msg = parse_error("{\n  \"scenario\": {\"preset\": \"schottky-2\"},\n  \"experiments\": [,]\n}");
  CHECK(contains(msg, "line 3"));
  CHECK(contains(msg, "column"));
}

TEST_CASE("field errors name the JSON pointer") {
  CHECK(contains(parse_error(R"({"experiments": []})"), "/scenario"));
  CHECK(contains(parse_error(R"({"scenario": {"preset": "nope"}, "experiments": []})"), "/scenario/preset"));
  CHECK(contains(parse_error(R"({"scenario": {"domain": {"kind": "unit_ball", "dim": 2}}, "experiments": []})"),
                 "/scenario/generators"));
  CHECK(contains(parse_error(R"({"scenario": {"domain": {"kind": "unit_ball", "dim": 2},
                                 "generators": [{"dim": 3, "data": [1, 0, 0, 0, 1, 0, 0, 0]}]},
                                 "experiments": []})"),
                 "/scenario/generators/0/data"));
  CHECK(contains(parse_error(R"({"scenario": {"domain": {"kind": "unit_ball", "dim": 2},
                                 "generators": [{"dim": 3}]}, "experiments": []})"),
                 "/scenario/generators/0/data"));
  CHECK(contains(parse_error(R"({"scenario": {"preset": "schottky-2"}, "experiments": [{"name": "bogus"}]})"),
                 "/experiments/0/name"));
  CHECK(contains(parse_error(R"({"scenario": {"preset": "schottky-2"},
                                 "experiments": [{"name": "orbit-ball", "radius": "ten"}]})"),
                 "/experiments/0/radius"));
  CHECK(contains(parse_error(R"({"scenario": {"preset": "schottky-2"},
                                 "experiments": [{"name": "orbit-ball", "radus": 3}]})"),
                 "/experiments/0/radus"));
  CHECK(contains(parse_error(R"({"scenario": {"preset": "schottky-2"}, "experiments": [], "sed": 1})"), "/sed"));
}

TEST_CASE("explicit scenario blocks load") {
  // symmetric square of diag(e, 1/e) in disk coordinates: translation of length 2
  const ScenarioConfig cfg = parse_config(R"({
    "scenario": {"name": "one-generator", "free_group": true,
                 "domain": {"kind": "unit_ball", "dim": 2},
                 "generators": [{"dim": 3, "data": [3.7621956910836314, 0, 3.626860407847019,
                                                    0, 1, 0,
                                                    3.626860407847019, 0, 3.7621956910836314]}],
                 "max_radius": 9},
    "experiments": [{"name": "orbit-ball", "radius": 7}]
  })");
  CHECK(cfg.scenario.rank() == 1);
  CHECK(cfg.scenario.max_radius == 9.0);
  CHECK(cfg.experiments.size() == 1);
  CHECK(cfg.experiments[0].path == "/experiments/0");
}

TEST_CASE("thread count precedence: flag, environment, config") {
  ::unsetenv("HLAB_THREADS");
  CHECK(effective_threads(0, 0) == 1);
  CHECK(effective_threads(0, 3) == 3);
  ::setenv("HLAB_THREADS", "5", 1);
  CHECK(effective_threads(0, 3) == 5);
  CHECK(effective_threads(2, 3) == 2);
  ::unsetenv("HLAB_THREADS");
}

TEST_CASE("doubles are written with 17 significant digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(format_double(2.0) == "2");
}

TEST_CASE("list of presets names the library") {
  bool schottky = false, parabolic = false;
  for (const auto& p : list_presets()) {
    schottky = schottky || p.name == "schottky-2";
    parabolic = parabolic || p.name == "parabolic-rank-1";
    if (p.category == "scenario")
      CHECK_NOTHROW(scenario_preset(p.name));
    else
      CHECK_NOTHROW(domain_preset(p.name));
  }
  CHECK(schottky);
  CHECK(parabolic);
}

TEST_CASE("runs are deterministic across repeats and thread counts") {
  const fs::path a = scratch("a"), b = scratch("b"), c = scratch("c");
  const ExperimentReport ra = run_to(kConfig, a, 1);
  run_to(kConfig, b, 1);
  run_to(kConfig, c, 4);
  CHECK_FALSE(ra.any_fail());
  REQUIRE(ra.outcomes.size() == 5);
  for (const auto& o : ra.outcomes) {
    CHECK(o.verdict == "pass");
    const fs::path name = fs::path(o.csv).filename();
    const std::string bytes = slurp(a / name);
    CHECK(!bytes.empty());
    CHECK(bytes == slurp(b / name));
    CHECK(bytes == slurp(c / name));
  }
  CHECK(fs::exists(a / "summary.json"));
  const nlohmann::json summary = nlohmann::json::parse(slurp(a / "summary.json"));
  CHECK(summary["experiments"].size() == 5);
  CHECK(summary["scenario"]["preset"] == "schottky-2");
  fs::remove_all(a);
  fs::remove_all(b);
  fs::remove_all(c);
}

TEST_CASE("module errors become verdicts with the experiment name") {
  const fs::path dir = scratch("errors");
  RunOverrides ov;
  ov.out_dir = dir.string();
  std::ostringstream log;
  const ExperimentReport r = run_experiments(parse_config(R"({
    "scenario": {"preset": "schottky-2"},
    "experiments": [{"name": "critical-exponent", "radius": 5},
                    {"name": "ps-measure", "radius": 8, "delta": 0.75, "s_factor": 0.9}]
  })"),
                                             ov, log);
  REQUIRE(r.outcomes.size() == 2);
  CHECK(r.outcomes[0].verdict == "inconclusive");
  CHECK(r.outcomes[1].verdict == "fail");
  CHECK(r.any_fail());
  CHECK(contains(log.str(), "critical-exponent"));
  CHECK(contains(log.str(), "ps-measure"));
  fs::remove_all(dir);
}

TEST_CASE("budget exhaustion is reported as a failure") {
  const fs::path dir = scratch("budget");
  RunOverrides ov;
  ov.out_dir = dir.string();
  ov.budget = 100;
  std::ostringstream log;
  const ExperimentReport r = run_experiments(
      parse_config(R"({"scenario": {"preset": "schottky-2"}, "experiments": [{"name": "orbit-ball", "radius": 10}]})"), ov,
      log);
  CHECK(r.outcomes[0].verdict == "fail");
  CHECK(contains(r.outcomes[0].error, "radius"));
  fs::remove_all(dir);
}
