// Runtime observables: the free energy and its per-step identity residual,
// the Ginzburg-Landau / discrepancy split, the norm bundle tracked across
// eps sweeps, Hoelder-in-time quotients over a snapshot ring, and the
// interface probe used to measure the jump of sigma = theta + chi*phi.

#pragma once

#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "chd/dynamics.hpp"

namespace chd {

struct DiagnosticsRecord {
    double t = 0.0;
    double energy_E = 0.0;         // full free energy
    double gl_energy = 0.0;        // integral of the Ginzburg-Landau density
    double discrepancy_pos = 0.0;  // integral of max(xi, 0)
    double G_quantity = 0.0;       // psi/(2 eps) + (eps/2)|grad phi|^2 + |theta|_L2^2
    double mean_phi = 0.0;
    double mean_mu = 0.0;
    double mean_theta_sigma = 0.0;  // spatial mean of sigma = theta + chi*phi
    double L2_phi_dev = 0.0;        // || |phi| - 1 ||_L2
    double L2_theta = 0.0;
    double H1_mu = 0.0;    // || grad mu ||_L2
    double H1_theta = 0.0;
    double L2_v = 0.0;
    double L2_p = 0.0;
    double tv_w = 0.0;     // || grad w(phi) ||_L1
    double energy_residual = 0.0;  // one-step energy-identity residual
    double sigma_jump = std::numeric_limits<double>::quiet_NaN();
    double max_abs_phi = 0.0;
    // solver residuals (not part of the CSV schema)
    double res_ch = 0.0, res_theta = 0.0, res_velocity = 0.0;
};

double energy_total(const SimState& state, const ModelSpec& model);

// (integral of e, integral of max(xi, 0)) where e = psi/eps + (eps/2)|grad phi|^2
// and xi = (eps/2)|grad phi|^2 - psi/eps.
std::pair<double, double> gl_density_and_discrepancy(const SimState& state,
                                                     const ModelSpec& model);

// |E(cur) - E(prev) + dt * dissipation - dt * sources| with midpoint-in-time
// fields; the velocity/pressure of `cur` are the ones active over the step.
double energy_identity_residual(const SimState& prev, const SimState& cur,
                                const ModelSpec& model, double dt);

// integral of |D v|^2 (symmetrized gradient) for the Brinkman dissipation.
double deformation_energy(const FaceField& v);

struct InterfaceProbe {
    struct Crossing {
        double x = 0.0, y = 0.0;
        int axis = 0;    // 0: crossing along an x grid line, 1: along y
        int orient = 0;  // sign of phi ahead minus behind along the axis
    };
    std::vector<Crossing> crossings;
    double delta = 0.0;            // probe offset
    double polyline_length = 0.0;  // 2D only: marching-squares estimate
    bool empty() const { return crossings.empty(); }
};

InterfaceProbe extract_interface(const ScalarField& phi);

// Linear interpolation of a cell field along the grid line through (x, y).
double sample_along_axis(const ScalarField& f, double x, double y, int axis);

// Mean over crossings of sigma(+side) - sigma(-side), +side being phi > 0.
// Returns nullopt when the probe has no crossings; throws ProbeError when a
// probe point leaves the domain.
std::optional<double> measure_sigma_jump(const SimState& state, const ModelSpec& model,
                                         const InterfaceProbe& probe);
// Same probe applied to an arbitrary field (used for the theta jump check).
std::optional<double> measure_jump(const ScalarField& f, const InterfaceProbe& probe);

double default_probe_offset(const ModelSpec& model, const GridSpec& grid);

// Fills the norm block of a record from one state.
void uniform_estimate_norms(const SimState& state, const ModelSpec& model, const WTransform& wt,
                            DiagnosticsRecord& rec);

// Full record; `prev` enables the energy-identity residual.
DiagnosticsRecord compute_record(const SimState* prev, const SimState& cur,
                                 const ModelSpec& model, const WTransform& wt, double dt,
                                 const StepInfo* info = nullptr);

struct HolderQuotients {
    double q_phi = 0.0;  // max ||phi(t)-phi(s)||_L2^2 / |t-s|^(1/4)
    double q_w = 0.0;    // max ||w(t)-w(s)||_L1   / |t-s|^(1/8)
};

// Decimated snapshot ring: keeps at most `capacity` snapshots by halving the
// retained set (and doubling the accept stride) whenever it fills up.
class SnapshotRing {
  public:
    explicit SnapshotRing(const WTransform& wt, int capacity = 32);

    void offer(double t, const ScalarField& phi);
    HolderQuotients quotients() const;
    int size() const { return static_cast<int>(snaps_.size()); }

  private:
    struct Snap {
        double t;
        ScalarField phi;
        ScalarField w;
    };
    const WTransform* wt_;
    int capacity_;
    long stride_ = 1;
    long counter_ = 0;
    std::vector<Snap> snaps_;
};

}  // namespace chd
