#pragma once

#include <filesystem>
#include <map>
#include <random>
#include <string>

#include "mcflab/scenario.hpp"

namespace mcf::detail {

enum class Rule { le, ge, eq };

struct CheckInfo {
  std::string pipeline;
  Rule rule;
};

const std::map<std::string, CheckInfo>& check_registry();

/// Shared state of one scenario run. `values` collects one measured value per requested check.
struct RunContext {
  const Scenario& scenario;
  std::filesystem::path dir;  // empty when artifacts are not written
  std::mt19937_64 rng;
  std::map<std::string, double> values;
  std::map<std::string, double> measurements;
  std::map<std::string, double> provenance;

  bool wants(const std::string& check) const;
  /// Opens dir / name for writing; returns false when artifacts are disabled.
  bool artifact(const std::string& name, std::ofstream& out) const;
};

void run_arrival_pipeline(RunContext& ctx);
void run_rescaled_pipeline(RunContext& ctx);
void run_spectral_pipeline(RunContext& ctx);
void run_frequency_pipeline(RunContext& ctx);

}  // namespace mcf::detail
