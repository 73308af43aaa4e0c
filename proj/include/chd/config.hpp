// Flat `key = value` run configuration: parsing with line-numbered errors,
// unknown-key rejection, documented defaults, and the admissibility gates
// (terminal-time bound, the eps0 ceiling, solenoidal-variant restrictions).

#pragma once

#include <string>
#include <vector>

#include "chd/dynamics.hpp"
#include "chd/potential.hpp"
#include "chd/sweep.hpp"

namespace chd {

struct SweepSettings {
    std::vector<double> eps_list;
    double cells_per_eps = 8.0;
    std::string mode = "scaling";  // scaling | brinkman_vs_darcy
    std::vector<std::string> metrics = {"L2_phi_dev"};
    double dt_base = 0.0;   // 0 means solver.dt
    double dt_power = 1.0;
    double beta = 1.0;
    double eta_fixed = -1.0;  // >= 0 pins eta for the control experiment
    std::string summary_csv = "sweep_summary.csv";
};

struct RunConfig {
    GridSpec grid;
    ModelSpec model;
    InitialData init;

    double dt = 0.0;
    int diag_interval = 10;
    std::string csv_path = "out.csv";
    std::string snapshot_dir;
    std::vector<double> snapshot_times;
    std::vector<std::string> snapshot_fields = {"phi"};
    int jobs = 0;  // 0 means hardware concurrency

    SweepSettings sweep;

    SweepPlan make_sweep_plan() const;
};

// Constants of the shipped quartic well, discovered once per process.
const PotentialConstants& default_quartic_constants();

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

// The documented default configuration (parseable as-is after the required
// keys are filled in).
std::string default_config_text();

}  // namespace chd
