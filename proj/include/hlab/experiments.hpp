#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hlab/group.hpp"

namespace hlab {

struct ExperimentSpec {
  std::string name;
  nlohmann::json params;  // object
  std::string path;       // JSON pointer of the block, for diagnostics
};

/// Parsed run configuration. The scenario block is either
///   {"preset": NAME, ...overrides}
/// or an explicit
///   {"name", "domain": {...}, "generators": [{"dim", "data"}], "free_group",
///    "basepoint", ...overrides}
/// where overrides are max_radius, prune_margin, max_word_length.
struct ScenarioConfig {
  GroupScenario scenario;
  nlohmann::json scenario_echo;
  std::vector<ExperimentSpec> experiments;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  int threads = 0;  // 0: not set
  std::optional<std::size_t> budget;
};

/// Throws Error(ParseError) naming the line/column (syntax) or the JSON
/// pointer of the offending field.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);
/// Scenario block alone (used for presets given on the command line).
GroupScenario parse_scenario(const nlohmann::json& block, const std::string& path = "/scenario");

/// Names accepted in the experiments list, in documentation order.
const std::vector<std::string>& experiment_names();
/// Experiments run by the property-suite subcommand.
const std::vector<std::string>& property_suite_names();

struct ExperimentOutcome {
  std::string name;
  std::string verdict;  // pass, fail or inconclusive
  std::string csv;      // path of the table, empty if none
  nlohmann::json summary;
  std::string error;
  double seconds = 0.0;
  std::size_t elements = 0;  // group elements enumerated
};

struct ExperimentReport {
  nlohmann::json scenario;
  nlohmann::json parameters;
  std::vector<ExperimentOutcome> outcomes;

  bool any_fail() const;
  nlohmann::json to_json() const;
};

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  int threads = 0;  // flag value; 0 when not given
  std::optional<std::size_t> budget;
  std::optional<std::string> out_dir;
};

/// Runs the experiments in order, writing one CSV per experiment and
/// summary.json into the output directory. Module errors are reported with
/// the experiment name on `log` and turn into fail (or inconclusive for
/// InsufficientData) verdicts.
ExperimentReport run_experiments(const ScenarioConfig& cfg, const RunOverrides& overrides, std::ostream& log);

/// Thread count: flag, then HLAB_THREADS, then the config, then 1.
int effective_threads(int flag, int config);

/// 17 significant digits, '.' decimal separator.
std::string format_double(double v);

}  // namespace hlab
