#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "mcflab/arrival.hpp"
#include "mcflab/flowline.hpp"
#include "mcflab/frequency.hpp"
#include "mcflab/mcf.hpp"
#include "mcflab/scenario.hpp"
#include "mcflab/spectral.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kPass = 0, kCheckFailure = 1, kConfigError = 2, kRuntimeError = 3;

struct Common {
  std::string config;
  std::string out;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  double tolerance_scale = 1.0;
};

void add_common(CLI::App* app, Common& c, bool config_required) {
  auto* opt = app->add_option("--config", c.config, "INI configuration file");
  if (config_required) opt->required();
  app->add_option("--out", c.out, "output root (default: $MCFLAB_OUT or ./mcflab_out)");
  app->add_option("--seed", c.seed, "random seed");
  app->add_option("--threads", c.threads, "worker threads for scenario batches")->check(CLI::PositiveNumber);
  app->add_option("--tolerance-scale", c.tolerance_scale, "multiplier for pass tolerances")->check(CLI::PositiveNumber);
}

std::string output_root(const Common& c) {
  if (!c.out.empty()) return c.out;
  if (const char* env = std::getenv("MCFLAB_OUT"); env && *env) return env;
  return "mcflab_out";
}

fs::path output_dir(const Common& c, const std::string& sub) {
  const fs::path dir = fs::path(output_root(c)) / sub;
  fs::create_directories(dir);
  return dir;
}

mcf::VecX parse_point(const std::string& text) {
  std::vector<double> v;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) v.push_back(std::stod(item));
  mcf::VecX x(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) x[static_cast<Eigen::Index>(i)] = v[i];
  return x;
}

int run_scenarios(const std::vector<std::string>& paths, const Common& c) {
  std::vector<mcf::Scenario> scenarios;
  for (const auto& p : paths) scenarios.push_back(mcf::load_scenario(p));
  std::sort(scenarios.begin(), scenarios.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  std::vector<mcf::Report> reports(scenarios.size());
  std::vector<std::string> errors(scenarios.size());
  std::vector<int> codes(scenarios.size(), kPass);
  mcf::RunOptions opts;
  opts.out_dir = output_root(c);
  opts.seed = c.seed;
  opts.tolerance_scale = c.tolerance_scale;
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i; (i = next++) < scenarios.size();) {
      try {
        reports[i] = mcf::run_scenario(scenarios[i], opts);
        codes[i] = reports[i].exit_code();
      } catch (const mcf::ConfigError& e) {
        errors[i] = e.what();
        codes[i] = kConfigError;
      } catch (const std::exception& e) {
        errors[i] = e.what();
        codes[i] = kRuntimeError;
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned workers = std::min<unsigned>(c.threads, static_cast<unsigned>(scenarios.size()));
  for (unsigned t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  int code = kPass;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    if (!errors[i].empty()) {
      std::cerr << scenarios[i].name << ": " << errors[i] << '\n';
    } else {
      for (const auto& r : reports[i].checks) {
        std::cout << scenarios[i].name << ' ' << r.name << ' ' << r.verdict << " value=" << r.value;
        if (r.verdict != "measured") std::cout << ' ' << r.rule << ' ' << r.threshold;
        std::cout << '\n';
      }
      std::cout << scenarios[i].name << " runtime " << reports[i].runtime << " s\n";
    }
    code = std::max(code, codes[i]);
  }
  return code;
}

int cmd_flow(const Common& c, double t_end, bool rescaled) {
  const auto sc = mcf::load_scenario(c.config, false);
  const auto g = mcf::build_geometry(sc);
  const fs::path dir = output_dir(c, "flow");
  if (rescaled) {
    const auto tr = mcf::run_rescaled(g.surface, t_end, mcf::rescaled_config(sc, g.k));
    std::ofstream(dir / "trace.csv") << [&] { std::ostringstream s; mcf::write_trace_csv(s, tr); return s.str(); }();
    std::ofstream(dir / "trace.json") << mcf::trace_json(tr);
    std::cout << "termination " << tr.termination << " t " << tr.t_final << " max_area_increase "
              << tr.max_area_increase << '\n';
    return kPass;
  }
  mcf::FlowOptions fo;
  fo.graded = g.k > 0;
  const auto run = mcf::run_mcf(g.surface, 0.0, t_end, fo);
  std::ofstream out(dir / "final_surface.csv");
  mcf::write_surface_csv(out, run.final);
  nlohmann::json j;
  j["termination"] = run.termination;
  j["tau"] = run.tau;
  j["steps"] = run.steps;
  j["singular_point"] = {run.singular_point.x(), run.singular_point.y()};
  std::ofstream(dir / "summary.json") << j.dump(2) << '\n';
  std::cout << j.dump() << '\n';
  return kPass;
}

int cmd_arrival(const Common& c) {
  const auto sc = mcf::load_scenario(c.config, false);
  const auto g = mcf::build_geometry(sc);
  const auto field = mcf::compute_arrival(g.surface, mcf::arrival_config(sc, g));
  const fs::path dir = output_dir(c, "arrival");
  mcf::write_field((dir / "field").string(), field);
  const auto crit = mcf::critical_analysis(field);
  nlohmann::json j;
  j["extinction_time"] = field.stats.extinction_time;
  j["cells"] = field.size();
  j["critical_points"] = crit.points.size();
  j["kernel_dimension"] = crit.k;
  if (!crit.points.empty()) {
    const auto& p = crit.points.front();
    j["laplacian"] = p.laplacian;
    j["eigenvalues"] = std::vector<double>(p.eigenvalues.data(), p.eigenvalues.data() + p.eigenvalues.size());
  }
  std::ofstream(dir / "summary.json") << j.dump(2) << '\n';
  std::cout << j.dump() << '\n';
  return kPass;
}

int cmd_trace(const Common& c, const std::string& field_base, const std::string& start) {
  auto field = std::make_shared<mcf::ArrivalField>(mcf::read_field(field_base));
  const auto ev = mcf::interpolate(field);
  const mcf::VecX x0 = parse_point(start);
  if (x0.size() != field->dim()) throw mcf::DomainError("start point has the wrong dimension");
  const auto line = mcf::trace(ev, x0);
  const auto curv = mcf::curvature_diagnostics(line, ev);
  const auto lim = mcf::limit_estimators(line);
  const fs::path dir = output_dir(c, "trace");
  std::ofstream out(dir / "flowline.csv");
  mcf::write_flowline_csv(out, line, &curv);
  nlohmann::json j;
  j["limit"] = std::vector<double>(line.limit.data(), line.limit.data() + line.limit.size());
  j["length"] = line.length;
  j["limit_critical"] = line.limit_critical;
  j["verdict"] = lim.verdict;
  j["tangent_osc"] = lim.tangent_osc;
  std::ofstream(dir / "summary.json") << j.dump(2) << '\n';
  std::cout << j.dump() << '\n';
  return kPass;
}

int cmd_spectral(const Common& c, int n, int k, int two_lambda) {
  const fs::path dir = output_dir(c, "spectral");
  std::ofstream out(dir / "spectral.json");
  nlohmann::json j;
  if (two_lambda >= 0) {
    for (const auto& p : mcf::hermite_eigen(n, two_lambda)) j["hermite"].push_back(p.to_string());
  } else {
    j["dimension"] = mcf::kernel_dimension(n, k);
    j["H_C"] = mcf::cylinder_mean_curvature(n, k);
    for (const auto& e : mcf::kernel_basis(n, k)) j["kernel"].push_back(nlohmann::json::parse(e.to_json()));
  }
  out << j.dump(2) << '\n';
  std::cout << j.dump(2) << '\n';
  return kPass;
}

struct FrequencyArgs {
  int n = 2, two_lambda = 2, index = 0;
  double r_min = 0.5, r_max = 6.0;
  int radii = 24;
  bool dichotomy = false;
  double lambda = 1.0, r0 = 1.0, u0 = 1.0, u0p = 1.0, probe_r_max = 20.0;
};

int cmd_frequency(const Common& c, const FrequencyArgs& a) {
  const fs::path dir = output_dir(c, "frequency");
  if (a.dichotomy) {
    mcf::DichotomyOptions o;
    o.r_max = a.probe_r_max;
    const auto res = mcf::dichotomy_probe(a.n, a.lambda, a.r0, a.u0, a.u0p, o);
    std::ofstream out(dir / "dichotomy.csv");
    mcf::write_dichotomy_csv(out, res);
    std::cout << "verdict " << res.verdict << " R1 " << res.R1 << " crossing " << res.crossing_r << '\n';
    return kPass;
  }
  const auto basis = mcf::hermite_eigen(a.n, a.two_lambda);
  if (a.index < 0 || a.index >= static_cast<int>(basis.size())) throw mcf::DomainError("eigenfunction index out of range");
  mcf::FrequencyProblem p;
  p.n = a.n;
  p.u = mcf::DriftFunction::flat(basis[static_cast<std::size_t>(a.index)]);
  p.lambda = 0.5 * a.two_lambda;
  p.r_min = a.r_min;
  p.r_max = a.r_max;
  const auto curve = mcf::frequency_curve(p, static_cast<std::size_t>(a.radii));
  std::ofstream out(dir / "frequency.csv");
  mcf::write_frequency_csv(out, curve);
  std::cout << "u = " << basis[static_cast<std::size_t>(a.index)].to_string() << "  U(r_max) = " << curve.back().U
            << '\n';
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mcflab: mean curvature flow, arrival times, flow lines and drift spectral checks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", mcf::version());
  Common common;

  auto* scenario = app.add_subcommand("scenario", "run scenario configs and evaluate their checks");
  std::vector<std::string> configs;
  scenario->add_option("configs", configs, "additional scenario files");
  add_common(scenario, common, false);

  auto* flow = app.add_subcommand("flow", "run MCF (or rescaled MCF) from the [geometry] section");
  double t_end = 1.0;
  bool rescaled = false;
  add_common(flow, common, true);
  flow->add_option("--t-end", t_end, "final time");
  flow->add_flag("--rescaled", rescaled, "integrate the rescaled flow and report F, delta_j, A_j");

  auto* arrival = app.add_subcommand("arrival", "compute the arrival-time field of the [geometry] surface");
  add_common(arrival, common, true);

  auto* tr = app.add_subcommand("trace", "trace one gradient flow line of a stored field");
  std::string field, start;
  add_common(tr, common, false);
  tr->add_option("--field", field, "field base path (without .bin/.json)")->required();
  tr->add_option("--x0", start, "start point, comma separated")->required();

  auto* spectral = app.add_subcommand("spectral", "kernel of L + 1 on a cylinder or Hermite eigenfunctions");
  int sn = 2, sk = 1, two_lambda = -1;
  add_common(spectral, common, false);
  spectral->add_option("--n", sn, "dimension n");
  spectral->add_option("--k", sk, "axis dimension k");
  spectral->add_option("--two-lambda", two_lambda, "list Hermite eigenfunctions of this degree on R^n instead");

  auto* frequency = app.add_subcommand("frequency", "frequency curve of a Hermite eigenfunction or a dichotomy probe");
  FrequencyArgs fa;
  add_common(frequency, common, false);
  frequency->add_option("--n", fa.n, "dimension");
  frequency->add_option("--two-lambda", fa.two_lambda, "eigenfunction degree");
  frequency->add_option("--index", fa.index, "eigenfunction index");
  frequency->add_option("--r-min", fa.r_min);
  frequency->add_option("--r-max", fa.r_max);
  frequency->add_option("--radii", fa.radii);
  frequency->add_flag("--dichotomy", fa.dichotomy, "integrate the radial eigenfunction ODE instead");
  frequency->add_option("--lambda", fa.lambda);
  frequency->add_option("--r0", fa.r0);
  frequency->add_option("--u0", fa.u0);
  frequency->add_option("--u0p", fa.u0p);
  frequency->add_option("--probe-r-max", fa.probe_r_max);

  auto* plots = app.add_subcommand("plots", "long-format plot tables from a report directory");
  std::string report_dir;
  plots->add_option("report_dir", report_dir, "directory holding report.json")->required();

  CLI11_PARSE(app, argc, argv);
  std::cout.precision(10);
  try {
    if (*scenario) {
      if (!common.config.empty()) configs.insert(configs.begin(), common.config);
      if (configs.empty()) throw mcf::ConfigError("no scenario given", "--config");
      return run_scenarios(configs, common);
    }
    if (*flow) return cmd_flow(common, t_end, rescaled);
    if (*arrival) return cmd_arrival(common);
    if (*tr) return cmd_trace(common, field, start);
    if (*spectral) return cmd_spectral(common, sn, sk, two_lambda);
    if (*frequency) return cmd_frequency(common, fa);
    if (*plots) {
      for (const auto& f : mcf::emit_plots(report_dir)) std::cout << f << '\n';
      return kPass;
    }
  } catch (const mcf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const mcf::MissingArtifact& e) {
    std::cerr << "missing artifacts: " << e.what() << '\n';
    return kRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kPass;
}
