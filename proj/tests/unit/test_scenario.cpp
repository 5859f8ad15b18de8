#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "mcflab/scenario.hpp"

using namespace mcf;
namespace fs = std::filesystem;

namespace {

ConfigTree spectral_tree() {
  return parse_ini("[scenario]\nname = unit_spectral\npipeline = spectral\n\n[spectral]\ncases = 2x1\npoints = 20\n\n"
                   "[checks]\neigen_identity = 1e-9\nkernel_dimension_formula = 0\ncylinder_h = measure\n");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_SUITE("scenario") {
  TEST_CASE("INI round trip") {
    const auto tree = spectral_tree();
    CHECK(parse_ini(serialize_ini(tree)) == tree);
    for (const auto& entry : fs::directory_iterator(MCFLAB_SCENARIO_DIR)) {
      const auto t = parse_ini(slurp(entry.path()));
      CHECK(parse_ini(serialize_ini(t)) == t);
      CHECK_NOTHROW(make_scenario(t));
    }
  }

  TEST_CASE("config errors name the offending key") {
    auto tree = spectral_tree();
    tree["spectral"]["colour"] = "blue";
    try {
      make_scenario(tree);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.key() == "spectral.colour");
    }
    tree = spectral_tree();
    tree["checks"]["sphere_error"] = "0.02";
    CHECK_THROWS_AS(make_scenario(tree), ConfigError);
    tree = spectral_tree();
    tree["checks"]["eigen_identity"] = "tight";
    CHECK_THROWS_AS(make_scenario(tree), ConfigError);
    tree = spectral_tree();
    tree["scenario"]["pipeline"] = "nonsense";
    CHECK_THROWS_AS(make_scenario(tree), ConfigError);
    CHECK_THROWS_AS(parse_ini("orphan = 1\n"), ConfigError);
  }

  TEST_CASE("report verdicts, measured checks and tolerance scaling") {
    const auto sc = make_scenario(spectral_tree());
    const auto rep = run_scenario(sc);
    REQUIRE(rep.checks.size() == 3);
    for (const auto& c : rep.checks) {
      if (c.name == "cylinder_h") CHECK(c.verdict == "measured");
      else CHECK(c.verdict == "pass");
    }
    CHECK(rep.exit_code() == 0);
    RunOptions o;
    o.tolerance_scale = 1e-9;
    const auto strict = run_scenario(sc, o);
    CHECK(strict.exit_code() == 1);
  }

  TEST_CASE("reports are byte identical across runs") {
    const auto sc = make_scenario(spectral_tree());
    const auto dir = fs::temp_directory_path() / "mcflab_unit_runs";
    RunOptions a, b;
    a.out_dir = (dir / "a").string();
    b.out_dir = (dir / "b").string();
    run_scenario(sc, a);
    run_scenario(sc, b);
    CHECK(slurp(dir / "a/unit_spectral/report.json") == slurp(dir / "b/unit_spectral/report.json"));
  }

  TEST_CASE("plots need report artifacts") {
    const auto empty = fs::temp_directory_path() / "mcflab_unit_empty";
    fs::create_directories(empty);
    CHECK_THROWS_AS(emit_plots(empty.string()), MissingArtifact);
    const auto sc = load_scenario(std::string(MCFLAB_SCENARIO_DIR) + "/frequency.ini");
    RunOptions o;
    o.out_dir = (fs::temp_directory_path() / "mcflab_unit_plots").string();
    run_scenario(sc, o);
    const auto files = emit_plots(o.out_dir + "/frequency");
    CHECK(!files.empty());
    for (const auto& f : files) CHECK(slurp(f).rfind("series,x,y\n", 0) == 0);
  }
}
