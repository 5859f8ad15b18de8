#include "mcflab/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "json.hpp"
#include "pipeline.hpp"

namespace mcf {

namespace pt = boost::property_tree;
namespace fs = std::filesystem;

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"scenario", {"name", "pipeline", "description"}},
      {"geometry",
       {"shape", "n", "radius", "a", "b", "samples", "bulb_radius", "bulb_center", "neck_radius", "fillet_radius",
        "amplitude", "period"}},
      {"arrival", {"h", "graded", "allow_partial", "extinction_radius", "inner_fraction", "ratio_radius"}},
      {"flowlines", {"count", "start_radius", "stop_factor", "axis_offset"}},
      {"rescaled", {"t_end", "k", "mode", "graded", "resample_ratio"}},
      {"spectral", {"cases", "points", "sweep", "linearization_cases", "linearization_eps", "h_c_samples"}},
      {"frequency", {"dims", "r_min", "r_max", "radii", "cross_r_max", "dichotomy_r_max", "polynomial_r_max"}},
      {"checks", {}},
  };
  return s;
}

const std::set<std::string> kPipelines = {"arrival", "rescaled", "spectral", "frequency"};

double parse_number(const std::string& raw, const std::string& key) {
  try {
    std::size_t used = 0;
    const double v = std::stod(raw, &used);
    if (used != raw.size()) throw std::invalid_argument(raw);
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError("expected a number, got '" + raw + "'", key);
  }
}

}  // namespace

ConfigTree parse_ini(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(e.message(), "line " + std::to_string(e.line()));
  }
  ConfigTree out;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("key outside of any section", section);
    auto& sec = out[section];
    for (const auto& [key, value] : body) sec[key] = value.get_value<std::string>();
  }
  return out;
}

std::string serialize_ini(const ConfigTree& tree) {
  pt::ptree root;
  for (const auto& [section, body] : tree) {
    pt::ptree sec;
    for (const auto& [key, value] : body) sec.put(pt::ptree::path_type(key, '\0'), value);
    root.add_child(pt::ptree::path_type(section, '\0'), sec);
  }
  std::ostringstream out;
  pt::write_ini(out, root);
  return out.str();
}

double Scenario::number(const std::string& section, const std::string& key, double fallback) const {
  const auto s = config.find(section);
  if (s == config.end()) return fallback;
  const auto k = s->second.find(key);
  return k == s->second.end() ? fallback : parse_number(k->second, section + "." + key);
}

int Scenario::integer(const std::string& section, const std::string& key, int fallback) const {
  const double v = number(section, key, fallback);
  if (v != std::floor(v)) throw ConfigError("expected an integer", section + "." + key);
  return static_cast<int>(v);
}

bool Scenario::flag(const std::string& section, const std::string& key, bool fallback) const {
  const std::string v = text(section, key, fallback ? "true" : "false");
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("expected true or false, got '" + v + "'", section + "." + key);
}

std::string Scenario::text(const std::string& section, const std::string& key, const std::string& fallback) const {
  const auto s = config.find(section);
  if (s == config.end()) return fallback;
  const auto k = s->second.find(key);
  return k == s->second.end() ? fallback : k->second;
}

std::vector<std::string> known_checks(const std::string& pipeline) {
  std::vector<std::string> out;
  for (const auto& [name, info] : detail::check_registry())
    if (info.pipeline == pipeline) out.push_back(name);
  return out;
}

Scenario make_scenario(const ConfigTree& tree, bool require_checks) {
  for (const auto& [section, body] : tree) {
    const auto s = schema().find(section);
    if (s == schema().end()) throw ConfigError("unknown section", section);
    if (section == "checks") continue;
    for (const auto& [key, value] : body)
      if (!s->second.count(key)) throw ConfigError("unknown key", section + "." + key);
  }
  Scenario sc;
  sc.config = tree;
  sc.name = sc.text("scenario", "name", "");
  sc.pipeline = sc.text("scenario", "pipeline", "");
  const auto checks = tree.find("checks");
  if (!require_checks && (checks == tree.end() || sc.pipeline.empty())) return sc;
  if (sc.name.empty()) throw ConfigError("missing scenario name", "scenario.name");
  if (sc.name.find_first_of("/\\ ") != std::string::npos) throw ConfigError("invalid scenario name", "scenario.name");
  if (!kPipelines.count(sc.pipeline)) throw ConfigError("unknown pipeline '" + sc.pipeline + "'", "scenario.pipeline");
  if (checks == tree.end() || checks->second.empty()) throw ConfigError("no checks configured", "checks");
  for (const auto& [name, raw] : checks->second) {
    const std::string key = "checks." + name;
    const auto info = detail::check_registry().find(name);
    if (info == detail::check_registry().end()) throw ConfigError("unknown check", key);
    if (info->second.pipeline != sc.pipeline)
      throw ConfigError("check belongs to the " + info->second.pipeline + " pipeline", key);
    CheckSpec spec;
    spec.name = name;
    if (raw == "measure") {
      spec.mode = CheckMode::measure;
      spec.threshold = std::numeric_limits<double>::quiet_NaN();
    } else {
      spec.threshold = parse_number(raw, key);
    }
    sc.checks.push_back(spec);
  }
  return sc;
}

Scenario load_scenario(const std::string& path, bool require_checks) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file", path);
  std::ostringstream text;
  text << in.rdbuf();
  return make_scenario(parse_ini(text.str()), require_checks);
}

int Report::exit_code() const {
  for (const auto& c : checks)
    if (c.verdict == "fail") return 1;
  return 0;
}

std::string Report::summary_json() const {
  nlohmann::json j;
  j["scenario"] = scenario;
  j["pipeline"] = pipeline;
  j["version"] = version;
  j["seed"] = seed;
  j["tolerance_scale"] = tolerance_scale;
  j["provenance"] = provenance;
  j["measurements"] = measurements;
  j["checks"] = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json e;
    e["name"] = c.name;
    e["verdict"] = c.verdict;
    e["value"] = c.value;
    e["threshold"] = c.threshold;
    e["rule"] = c.rule;
    j["checks"].push_back(e);
  }
  j["exit_code"] = exit_code();
  return j.dump(2) + "\n";
}

namespace detail {

bool RunContext::wants(const std::string& check) const {
  return std::any_of(scenario.checks.begin(), scenario.checks.end(),
                     [&](const CheckSpec& c) { return c.name == check; });
}

bool RunContext::artifact(const std::string& name, std::ofstream& out) const {
  if (dir.empty()) return false;
  out.open(dir / name);
  if (!out) throw Error("cannot write " + (dir / name).string());
  out.precision(17);
  return true;
}

}  // namespace detail

Report run_scenario(const Scenario& scenario, const RunOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  detail::RunContext ctx{scenario, {}, std::mt19937_64(opts.seed), {}, {}, {}};
  if (!opts.out_dir.empty()) {
    ctx.dir = fs::path(opts.out_dir) / scenario.name;
    fs::create_directories(ctx.dir);
  }
  if (scenario.pipeline == "arrival") detail::run_arrival_pipeline(ctx);
  if (scenario.pipeline == "rescaled") detail::run_rescaled_pipeline(ctx);
  if (scenario.pipeline == "spectral") detail::run_spectral_pipeline(ctx);
  if (scenario.pipeline == "frequency") detail::run_frequency_pipeline(ctx);

  Report rep;
  rep.scenario = scenario.name;
  rep.pipeline = scenario.pipeline;
  rep.version = version();
  rep.seed = opts.seed;
  rep.tolerance_scale = opts.tolerance_scale;
  rep.provenance = ctx.provenance;
  rep.measurements = ctx.measurements;
  for (const auto& spec : scenario.checks) {
    const auto rule = detail::check_registry().at(spec.name).rule;
    CheckResult r;
    r.name = spec.name;
    const auto v = ctx.values.find(spec.name);
    r.value = v == ctx.values.end() ? std::numeric_limits<double>::quiet_NaN() : v->second;
    r.rule = rule == detail::Rule::le ? "<=" : rule == detail::Rule::ge ? ">=" : "==";
    if (spec.mode == CheckMode::measure) {
      r.verdict = "measured";
      r.threshold = std::numeric_limits<double>::quiet_NaN();
    } else {
      // Tolerances scale; exact (==) targets and lower bounds (>=) do not loosen.
      r.threshold = rule == detail::Rule::le ? spec.threshold * opts.tolerance_scale : spec.threshold;
      const bool ok = rule == detail::Rule::le   ? r.value <= r.threshold
                      : rule == detail::Rule::ge ? r.value >= r.threshold
                                                 : r.value == r.threshold;
      r.verdict = ok ? "pass" : "fail";
    }
    rep.checks.push_back(r);
  }
  rep.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!ctx.dir.empty()) {
    std::ofstream(ctx.dir / "report.json") << rep.summary_json();
    std::ofstream(ctx.dir / "config.ini") << serialize_ini(scenario.config);
    nlohmann::json t;
    t["runtime_seconds"] = rep.runtime;
    t["finished_unix"] = static_cast<long long>(std::time(nullptr));
    std::ofstream(ctx.dir / "timing.json") << t.dump(2) << "\n";
  }
  return rep;
}

std::string version() { return MCFLAB_VERSION; }

}  // namespace mcf
