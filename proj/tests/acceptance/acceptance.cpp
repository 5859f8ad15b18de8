// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 when any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mcflab/arrival.hpp"
#include "mcflab/scenario.hpp"

namespace fs = std::filesystem;

namespace {

std::string g_scenarios = MCFLAB_SCENARIO_DIR;
fs::path g_out = fs::temp_directory_path() / "mcflab_acceptance";

struct Line {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

mcf::ConfigTree tree_of(const std::string& name) { return mcf::parse_ini(slurp(g_scenarios + "/" + name + ".ini")); }

std::map<std::string, mcf::Report> g_reports;

const mcf::Report& report(const std::string& name) {
  auto it = g_reports.find(name);
  if (it == g_reports.end()) {
    mcf::RunOptions o;
    o.out_dir = (g_out / "a").string();
    it = g_reports.emplace(name, mcf::run_scenario(mcf::make_scenario(tree_of(name)), o)).first;
  }
  return it->second;
}

const mcf::CheckResult& check(const std::string& scenario, const std::string& name) {
  for (const auto& c : report(scenario).checks)
    if (c.name == name) return c;
  throw mcf::Error("check " + name + " is not configured in " + scenario);
}

/// Every pass-mode check of the listed (scenario, check) pairs must pass.
void require_checks(Line& line, const std::vector<std::pair<std::string, std::string>>& items) {
  for (const auto& [sc, name] : items) {
    const auto& c = check(sc, name);
    line.detail << ' ' << sc << '.' << name << '=' << c.value;
    std::ostringstream rule;
    rule << sc << '.' << name << ' ' << c.rule << ' ' << c.threshold;
    line.require(c.verdict == "pass", rule.str());
  }
}

/// Relative sphere error at spacing h, with the runtime of that run.
std::pair<double, double> sphere_error_at(const std::string& name, double h) {
  auto tree = tree_of(name);
  tree["arrival"]["h"] = std::to_string(h);
  tree["checks"] = {{"sphere_error", "0.02"}};
  tree["scenario"]["name"] = name + "_h" + std::to_string(static_cast<int>(std::lround(1 / h)));
  const auto rep = mcf::run_scenario(mcf::make_scenario(tree));
  return {rep.checks.front().value, rep.runtime};
}

void criterion1(Line& line) {
  for (const std::string name : {"circle_n1", "sphere_n2"}) {
    std::vector<double> lh, le;
    double runtime = 0, err = 0;
    for (double h : {1.0 / 32, 1.0 / 64, 1.0 / 128}) {
      std::tie(err, runtime) = sphere_error_at(name, h);
      lh.push_back(std::log(h));
      le.push_back(std::log(err));
    }
    // Least-squares slope of log error against log h.
    const double mh = (lh[0] + lh[1] + lh[2]) / 3, me = (le[0] + le[1] + le[2]) / 3;
    double sxy = 0, sxx = 0;
    for (int i = 0; i < 3; ++i) {
      sxy += (lh[i] - mh) * (le[i] - me);
      sxx += (lh[i] - mh) * (lh[i] - mh);
    }
    const double order = sxy / sxx;
    line.detail << ' ' << name << " err=" << err << " order=" << order << " runtime=" << runtime << "s";
    line.require(err <= 0.02, name + " error <= 2%");
    line.require(order >= 1.9, name + " order >= 1.9");
    line.require(runtime <= 60, name + " runtime <= 60 s");
  }
}

void criterion4(Line& line) {
  require_checks(line, {{"circle_n1", "gradient_exponent"}, {"sphere_n2", "gradient_exponent"}});
  // |u - u(y)| = |grad u|^{m/(m-1)} with m = 3 and 1% multiplicative noise over three decades.
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<std::pair<double, double>> pairs;
  for (int i = 0; i < 200; ++i) {
    const double g = std::pow(10.0, -3.0 + 3.0 * i / 199);
    pairs.emplace_back(std::pow(g, 1.5) * std::exp(noise(rng)), g);
  }
  const auto fit = mcf::exponent_fit(pairs);
  line.detail << " synthetic_m3_p=" << fit.p;
  line.require(std::abs(fit.p - 1.5) <= 0.05, "synthetic m = 3 exponent 1.5 +- 0.05");
}

void criterion8(Line& line) {
  require_checks(line, {{"frequency", "frequency_power"},
                        {"frequency", "frequency_cross_form"},
                        {"frequency", "log_derivative"},
                        {"frequency", "dichotomy"}});
  const double t = report("frequency").runtime;
  line.detail << " runtime=" << t << "s";
  line.require(t <= 30, "runtime <= 30 s");
}

void criterion9(Line& line) {
  mcf::RunOptions o;
  o.out_dir = (g_out / "b").string();
  for (const std::string name : {"spectral", "frequency", "sphere_round", "dumbbell"}) {
    report(name);
    mcf::run_scenario(mcf::make_scenario(tree_of(name)), o);
    const auto a = slurp(g_out / "a" / name / "report.json");
    const auto b = slurp(g_out / "b" / name / "report.json");
    const bool same = !a.empty() && a == b;
    line.detail << ' ' << name << (same ? " identical" : " differs");
    line.require(same, name + " report.json byte identical");
  }
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--out") g_out = argv[i + 1];
    if (flag == "--scenarios") g_scenarios = argv[i + 1];
  }
  fs::remove_all(g_out);
  std::cout.precision(4);

  const std::vector<std::pair<std::string, std::function<void(Line&)>>> criteria = {
      {"sphere arrival accuracy, order and runtime", criterion1},
      {"Lojasiewicz ratio tail",
       [](Line& l) {
         require_checks(l, {{"circle_n1", "ratio_tail"}, {"sphere_n2", "ratio_tail"}, {"dumbbell", "ratio_tail"}});
       }},
      {"Hessian structure",
       [](Line& l) {
         require_checks(l, {{"sphere_n2", "hessian_eigenvalues"},
                            {"sphere_n2", "hessian_laplacian"},
                            {"dumbbell", "kernel_dimension"},
                            {"dumbbell", "hessian_eigenvalues"},
                            {"dumbbell", "hessian_laplacian"}});
       }},
      {"gradient inequality exponent", criterion4},
      {"flow lines",
       [](Line& l) {
         require_checks(l, {{"circle_n1", "flow_u"},       {"circle_n1", "flow_grad"},
                            {"circle_n1", "flow_length"},  {"circle_n1", "flow_oscillation"},
                            {"sphere_n2", "flow_u"},       {"sphere_n2", "flow_grad"},
                            {"sphere_n2", "flow_length"},  {"sphere_n2", "flow_oscillation"},
                            {"ellipse", "flow_u"},         {"ellipse", "flow_grad"},
                            {"ellipse", "flow_length"},    {"ellipse", "flow_oscillation"},
                            {"ellipse", "spiral_control"}, {"dumbbell", "flow_axis"},
                            {"dumbbell", "flow_oscillation"}});
       }},
      {"rescaled MCF",
       [](Line& l) {
         require_checks(l, {{"sphere_round", "area_monotone"},
                            {"sphere_round", "radius_convergence"},
                            {"sphere_round", "a_round"},
                            {"sphere_off_radius", "area_monotone"},
                            {"sphere_off_radius", "radius_convergence"},
                            {"sphere_off_radius", "delta_decay"},
                            {"sphere_off_radius", "delta_sum_tail"},
                            {"sphere_off_radius", "a_round"},
                            {"neck", "area_monotone"},
                            {"neck", "delta_decay"},
                            {"neck", "delta_sum_tail"},
                            {"neck", "a_cauchy"}});
       }},
      {"spectral suite",
       [](Line& l) {
         require_checks(l, {{"spectral", "eigen_identity"},
                            {"spectral", "kernel_dimension_formula"},
                            {"spectral", "projection_recovery"},
                            {"spectral", "projection_slope"},
                            {"spectral", "linearization_slope"},
                            {"spectral", "cylinder_h"}});
       }},
      {"frequency suite", criterion8},
      {"determinism", criterion9},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Line line;
    try {
      criteria[i].second(line);
    } catch (const std::exception& e) {
      line.pass = false;
      line.detail << " [error: " << e.what() << "]";
    }
    failed += !line.pass;
    std::cout << "criterion " << i + 1 << ' ' << (line.pass ? "PASS" : "FAIL") << " (" << criteria[i].first
              << "):" << line.detail.str() << std::endl;
  }
  std::cout << criteria.size() - failed << '/' << criteria.size() << " criteria pass" << std::endl;
  return failed ? 1 : 0;
}
