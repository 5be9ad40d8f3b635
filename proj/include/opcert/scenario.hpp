#pragma once

#include "opcert/config.hpp"
#include "opcert/report.hpp"

namespace opcert {

struct Scenario {
  std::string name = "scenario";
  std::uint64_t seed = 0;
  int jobs = 1;

  std::string operator_expr = "i_d_dx";
  std::string interval = "-inf,inf";

  double half_width = 20.0;
  int n_points = 2001;
  int refine_levels = 0;

  std::string cutoff_rho = "smooth_abs";
  std::vector<int> cutoff_indices;

  std::vector<std::string> checks;

  // per-check knobs
  double generator_radius = 0.75;     // kasparov
  std::string perturbation_expr;      // kasparov stability proxy, empty = skip
  int multiplier_depth = 4;           // multiplier
  std::vector<int> multiplier_ladder;
  double totals_radius = 24.0;
  int totals_count = 3;
  double lambda_max = 8.0;
  std::uint64_t battery_seed = 2025;  // finmod

  std::string json_out;
  std::string csv_out;
  std::string svg_out;
};

Scenario scenario_from_config(const Config& cfg);

struct RunResult {
  Json report;
  bool all_pass = false;
  std::vector<SpectrumRow> spectra;
};

// Executes the scenario's checks in dependency order and assembles the
// versioned report (schema_version 1). Every numeric verdict carries the
// tolerance it was tested against.
RunResult run_scenario(const Scenario& s, const std::string& config_hash);

// Eigenvalues of the discretized scenario operator per refinement level.
std::vector<SpectrumRow> compute_spectrum(const Scenario& s);

}  // namespace opcert
