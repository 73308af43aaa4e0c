// The eps-convergence harness: run a family of simulations over a decreasing
// eps sequence with the grid refined in proportion (so the interface is
// always resolved by the same number of cells), fit power laws to the
// collected metrics, and compare the scaled-viscosity Brinkman flow against
// Darcy on matched grids.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "chd/diagnostics.hpp"

namespace chd {

struct SweepPlan {
    std::vector<double> eps_list;  // strictly decreasing, all <= eps0 guard
    double cells_per_eps = 8.0;    // nx = ceil(cells_per_eps * lx / eps)
    int dim = 1;
    double lx = 1.0, ly = 1.0;

    ModelSpec base_model;  // eps/eta fields are overwritten per run
    InitialData init;
    double T_end = 0.0;

    // dt(eps) = dt_base * (eps / eps_list.front())^dt_power
    double dt_base = 1e-4;
    double dt_power = 1.0;

    int diag_interval = 8;                  // snapshot-ring feed interval (steps)
    std::vector<std::string> metrics = {"L2_phi_dev"};

    double eps0_guard = 1.0;  // min(1, k0 / chi^2), from the potential scan

    double dt_for(double eps) const;
    int nx_for(double eps) const;
    void validate() const;
};

struct EpsRunResult {
    double eps = 0.0;
    bool ok = false;
    std::string error;
    DiagnosticsRecord final_record;
    HolderQuotients holder;
    double max_abs_phi_run = 0.0;
};

struct PowerLawFit {
    double slope = 0.0;
    double intercept = 0.0;  // in log space
    double residual = 0.0;   // rms of log residuals
};

// Least squares of log(value) against log(eps). Requires >= 3 positive pairs.
PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& pairs);

struct SweepReport {
    std::vector<EpsRunResult> results;
    std::map<std::string, PowerLawFit> fits;  // only when >= 3 eps succeeded
    std::map<std::string, std::vector<double>> pairwise_orders;
    bool all_ok = false;
    bool any_ok = false;

    double metric_value(const EpsRunResult& r, const std::string& name) const;
};

double record_metric(const DiagnosticsRecord& rec, const std::string& name);

SweepReport run_sweep(const SweepPlan& plan, int jobs = 1);

// Lockstep Brinkman-vs-Darcy comparison on identical grids, steps and data.
// `eta_fixed < 0` means eta = eps^beta per-run; otherwise eta is pinned.
struct BrinkmanDarcyRow {
    double eps = 0.0;
    double eta = 0.0;
    bool ok = false;
    std::string error;
    double vdiff_L2Q = 0.0;     // space-time L2 of v_B - v_D
    double vdiff_final = 0.0;   // L2 at the final time
};

std::vector<BrinkmanDarcyRow> compare_brinkman_darcy(const SweepPlan& plan, double beta,
                                                     double eta_fixed = -1.0, int jobs = 1);

}  // namespace chd
