#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mcflab/arrival.hpp"
#include "mcflab/common.hpp"
#include "mcflab/mcf.hpp"

namespace mcf {

/// Invalid configuration; `key` names the offending section.key.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::string key) : Error(what + " [" + key + "]"), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Report artifacts absent from a directory.
class MissingArtifact : public Error {
 public:
  using Error::Error;
};

/// INI document: section -> key -> raw value.
using ConfigTree = std::map<std::string, std::map<std::string, std::string>>;

ConfigTree parse_ini(const std::string& text);
std::string serialize_ini(const ConfigTree& tree);

enum class CheckMode { pass, measure };

struct CheckSpec {
  std::string name;
  CheckMode mode = CheckMode::pass;
  double threshold = 0;
};

/// Pipelines: "arrival" (geometry -> MCF sweep -> arrival field -> analysis and flow lines),
/// "rescaled" (geometry -> rescaled MCF), "spectral" and "frequency".
struct Scenario {
  std::string name;
  std::string pipeline;
  ConfigTree config;  // every section, including [scenario] and [checks]
  std::vector<CheckSpec> checks;

  double number(const std::string& section, const std::string& key, double fallback) const;
  int integer(const std::string& section, const std::string& key, int fallback) const;
  bool flag(const std::string& section, const std::string& key, bool fallback) const;
  std::string text(const std::string& section, const std::string& key, const std::string& fallback) const;
};

/// Validates sections, keys and check names against the pipeline; ConfigError otherwise.
/// Without `require_checks` the name, pipeline and [checks] may be absent (single-module commands).
Scenario make_scenario(const ConfigTree& tree, bool require_checks = true);
Scenario load_scenario(const std::string& path, bool require_checks = true);

/// Initial surface described by the [geometry] section.
struct ScenarioGeometry {
  std::string shape;  // circle, ellipse, sphere, dumbbell or neck
  int n = 1;
  int k = 0;          // expected kernel dimension at the first singularity
  Surface surface;
};
ScenarioGeometry build_geometry(const Scenario& sc);
ArrivalConfig arrival_config(const Scenario& sc, const ScenarioGeometry& g);
RescaledConfig rescaled_config(const Scenario& sc, int k);

/// Known checks per pipeline.
std::vector<std::string> known_checks(const std::string& pipeline);

struct CheckResult {
  std::string name;
  std::string verdict;  // "pass", "fail" or "measured"
  double value = 0;
  double threshold = 0;  // after tolerance scaling; NaN for measured-only checks
  std::string rule;      // "<=", ">=" or "=="
};

struct Report {
  std::string scenario;
  std::string pipeline;
  std::string version;
  std::uint64_t seed = 0;
  double tolerance_scale = 1;
  std::map<std::string, double> provenance;    // grid spacing, sample counts, ...
  std::vector<CheckResult> checks;
  std::map<std::string, double> measurements;  // additional measured-only values
  double runtime = 0;  // seconds, kept out of the JSON summary

  /// 0 when every pass-check passes, 1 otherwise.
  int exit_code() const;
  /// Deterministic for fixed scenario, seed and tolerance scale.
  std::string summary_json() const;
};

struct RunOptions {
  std::string out_dir;  // artifacts go to out_dir / scenario name; empty writes nothing
  std::uint64_t seed = 1;
  double tolerance_scale = 1.0;
};

/// Runs the pipeline, evaluates the checks and writes report.json, timing.json and CSV artifacts.
Report run_scenario(const Scenario& scenario, const RunOptions& opts = {});

/// Reads the CSV artifacts of a report directory and writes long-format plot tables
/// (series, x, y). Returns the files written; MissingArtifact when report.json or every known
/// artifact is absent.
std::vector<std::string> emit_plots(const std::string& report_dir);

/// Version string of the library.
std::string version();

}  // namespace mcf
