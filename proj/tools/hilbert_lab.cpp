// hilbert_lab: command-line front end for the experiment runner.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hlab/experiments.hpp"
#include "hlab/presets.hpp"

namespace {

using nlohmann::json;

struct Globals {
  std::string config;
  std::string out;
  long long seed = -1;
  int threads = 0;
  long long budget = 0;
};

struct Single {
  std::string preset = "schottky-2";
  std::vector<std::string> params;  // key=value, value parsed as JSON
};

int list_presets(bool self_test) {
  int failures = 0;
  for (const auto& p : hlab::list_presets()) {
    std::cout << p.category << "\t" << p.name << "\t" << p.description << "\n";
    if (!self_test) continue;
    try {
      if (p.category == "scenario")
        (void)hlab::scenario_preset(p.name);
      else
        (void)hlab::domain_preset(p.name);
    } catch (const std::exception& e) {
      std::cerr << "preset '" << p.name << "' failed to load: " << e.what() << "\n";
      ++failures;
    }
  }
  if (self_test) std::cout << (failures == 0 ? "self-test: all presets load\n" : "self-test: FAILED\n");
  return failures == 0 ? 0 : 1;
}

json parse_param_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return text;  // bare strings
  }
}

// Config text for one experiment on a preset, with key=value parameters.
std::string single_config(const std::vector<std::string>& names, const Single& s) {
  json params = json::object();
  for (const auto& kv : s.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw CLI::ValidationError("--param", "expected key=value, got '" + kv + "'");
    params[kv.substr(0, eq)] = parse_param_value(kv.substr(eq + 1));
  }
  json cfg = {{"scenario", {{"preset", s.preset}}}, {"experiments", json::array()}};
  for (const auto& n : names) {
    json e = params;
    e["name"] = n;
    cfg["experiments"].push_back(e);
  }
  return cfg.dump();
}

// With --config, keeps only the config's experiments among `names` (all of
// them with default parameters if the config lists none).
hlab::ScenarioConfig select(hlab::ScenarioConfig cfg, const std::vector<std::string>& names) {
  std::vector<hlab::ExperimentSpec> kept;
  for (const auto& e : cfg.experiments)
    if (std::find(names.begin(), names.end(), e.name) != names.end()) kept.push_back(e);
  if (kept.empty())
    for (const auto& n : names) kept.push_back({n, json::object(), "/experiments"});
  cfg.experiments = std::move(kept);
  return cfg;
}

int run(const hlab::ScenarioConfig& cfg, const Globals& g) {
  hlab::RunOverrides ov;
  if (g.seed >= 0) ov.seed = static_cast<std::uint64_t>(g.seed);
  ov.threads = g.threads;
  if (g.budget > 0) ov.budget = static_cast<std::size_t>(g.budget);
  if (!g.out.empty()) ov.out_dir = g.out;
  const hlab::ExperimentReport rep = hlab::run_experiments(cfg, ov, std::cerr);
  for (const auto& o : rep.outcomes) {
    std::cout << o.name << "\t" << o.verdict;
    if (!o.csv.empty()) std::cout << "\t" << o.csv;
    std::cout << "\n";
  }
  return rep.any_fail() ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hilbert geometry and Patterson-Sullivan experiment runner"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "JSON configuration file");
  app.add_option("--out", g.out, "Output directory (overrides the config)");
  app.add_option("--seed", g.seed, "Random seed (overrides the config)")->check(CLI::NonNegativeNumber);
  app.add_option("--threads", g.threads, "Worker threads (overrides HLAB_THREADS and the config)")->check(CLI::PositiveNumber);
  app.add_option("--budget", g.budget, "Element budget for orbit enumeration")->check(CLI::PositiveNumber);

  auto* run_cmd = app.add_subcommand("run", "Run every experiment of --config");
  run_cmd->fallthrough();

  bool self_test = false;
  auto* list_cmd = app.add_subcommand("list-presets", "List scenario and domain presets");
  list_cmd->add_flag("--self-test", self_test, "Load every preset and report failures");

  std::map<CLI::App*, std::vector<std::string>> singles;
  Single single;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"distance", "Hilbert distances of random or given point pairs"},
      {"orbit-ball", "Enumerate an orbit ball"},
      {"critical-exponent", "Estimate the critical exponent"},
      {"ps-measure", "Patterson-Sullivan density with conformality and equivariance checks"},
      {"shadow-audit", "Shadow lemma and shadow sandwich audit"},
      {"closed-geodesics", "Closed geodesic counting"},
      {"orbit-count", "Orbit counting plateau"},
      {"equidistribution", "Cap cross-ratio equidistribution"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    sub->add_option("--preset", single.preset, "Scenario preset (ignored with --config)");
    sub->add_option("--param", single.params, "Experiment parameter key=value (value as JSON)");
    singles[sub] = {name};
  }
  std::string suite;
  auto* suite_cmd = app.add_subcommand("property-suite", "Klein model, metric axioms, Crampon and Busemann suites");
  suite_cmd->fallthrough();
  suite_cmd->add_option("--suite", suite, "Run only this suite")
      ->check(CLI::IsMember(hlab::property_suite_names()));
  suite_cmd->add_option("--preset", single.preset, "Scenario preset (ignored with --config)");
  suite_cmd->add_option("--param", single.params, "Parameter key=value passed to every suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list_cmd->parsed()) return list_presets(self_test);
    if (run_cmd->parsed()) {
      if (g.config.empty()) throw CLI::RequiredError("--config");
      return run(hlab::load_config(g.config), g);
    }
    std::vector<std::string> names;
    if (suite_cmd->parsed()) {
      names = suite.empty() ? hlab::property_suite_names() : std::vector<std::string>{suite};
    } else {
      for (const auto& [sub, n] : singles)
        if (sub->parsed()) names = n;
    }
    if (!g.config.empty()) return run(select(hlab::load_config(g.config), names), g);
    return run(hlab::parse_config(single_config(names, single)), g);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
