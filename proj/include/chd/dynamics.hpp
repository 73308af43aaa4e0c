// Time integration of the coupled phase/chemical/flow system.
//
// One step advances, in order: velocity (Darcy pressure solve, projected
// Brinkman solve, or identically zero), then the stabilized IMEX
// Cahn-Hilliard update for (phi, mu), then the implicit diffusion update for
// theta. Advection is explicit first-order upwind, so the only step-size
// restriction is the advective CFL condition checked every step.

#pragma once

#include <functional>
#include <optional>
#include <string>

#include "chd/elliptic.hpp"
#include "chd/grid.hpp"
#include "chd/potential.hpp"

namespace chd {

enum class Variant { Darcy, Brinkman, BrinkmanScaled, ZeroVelocity };

std::string variant_name(Variant v);

// Prescribed sources: U(x) drives phase gain/loss through U*phi, S(x,t) feeds
// the chemical species, H(x,t) is the velocity divergence. U and H carry zero
// spatial mean; sampled fields are re-projected to kill quadrature leftovers.
struct SourceSpec {
    using SpaceFn = std::function<double(double, double)>;
    using SpaceTimeFn = std::function<double(double, double, double)>;  // (x, y, t)

    SpaceFn U;        // null means zero
    SpaceTimeFn S;    // null means zero
    SpaceTimeFn H;    // null means zero

    bool has_U() const { return static_cast<bool>(U); }
    bool has_S() const { return static_cast<bool>(S); }
    bool has_H() const { return static_cast<bool>(H); }

    ScalarField sample_U(const GridSpec& g) const;          // projected to zero mean
    ScalarField sample_S(const GridSpec& g, double t) const;
    ScalarField sample_H(const GridSpec& g, double t) const;  // projected to zero mean
    double sup_norm_U(const GridSpec& g) const;
};

struct ModelSpec {
    double eps = 0.0;
    double chi = 0.0;
    double K = 1.0;
    Variant variant = Variant::ZeroVelocity;
    double eta = 0.0;   // Brinkman viscosity
    double beta = 0.0;  // BrinkmanScaled: eta = eps^beta

    std::function<double(double)> mobility_m;  // null means 1
    std::function<double(double)> mobility_n;
    DoubleWell potential = DoubleWell::normalized_quartic();
    SourceSpec sources;
    double T_end = 0.0;

    // numerics carried with the model so that step() is self-contained
    double S0 = 4.0;  // convex-splitting stabilization
    LinSolveConfig lin;

    double effective_eta() const;
    double mob_m(double s) const { return mobility_m ? mobility_m(s) : 1.0; }
    double mob_n(double s) const { return mobility_n ? mobility_n(s) : 1.0; }

    // Scan-based admissibility checks: positive bounded mobilities on
    // [-2, 2], variant-consistent parameters, H forbidden away from Darcy.
    void validate() const;
};

struct SimState {
    ScalarField phi, mu, theta, p;
    FaceField v;  // velocity active during the step that produced this state
    double t = 0.0;
    long step = 0;

    ScalarField sigma(double chi) const {  // sigma = theta + chi * phi
        ScalarField s = theta;
        s.data += chi * phi.data;
        return s;
    }
    bool finite() const {
        return phi.finite() && mu.finite() && theta.finite() && p.finite() && v.finite();
    }
};

struct InitialData {
    enum class Kind { TanhStrip, TanhCircle, RandomPerturbation };
    Kind kind = Kind::TanhStrip;
    double center_x = 0.5, center_y = 0.5;
    double normal_x = 1.0, normal_y = 0.0;  // strip orientation
    double radius = 0.25;
    double amplitude = 0.05;                // random perturbation size
    std::uint64_t seed = 0;
    bool seed_set = false;
    double u0 = 0.0;      // target mean of phi
    double theta0 = 0.0;  // constant initial theta
};

SimState make_initial_state(const GridSpec& grid, const ModelSpec& model,
                            const InitialData& init);

struct VelocityResult {
    FaceField v;
    ScalarField p;
    double rhs_projection = 0.0;  // magnitude removed to make the Poisson rhs compatible
    SolveStats stats;
};

// Darcy: assemble the capillary force on faces, solve the pressure Poisson
// problem -Lap p = K*H - div(force), then v = (force - grad p) / K so that
// div v = H discretely.
VelocityResult compute_velocity_darcy(const SimState& state, const ModelSpec& model);

// Brinkman / BrinkmanScaled: same force, projected Brinkman solve, div v = 0.
VelocityResult compute_velocity_brinkman(const SimState& state, const ModelSpec& model);

struct StepInfo {
    SolveStats velocity, ch, theta;
    double cfl = 0.0;            // dt * max|v| / min(h)
    double rhs_projection = 0.0;
};

// One time step. Throws SolverError on CFL violation, solver failure, or a
// non-finite field (divergence), tagged with the step index.
SimState step(const SimState& state, const ModelSpec& model, double dt,
              StepInfo* info = nullptr);

// Callbacks receive every state (the initial one included) in order.
using StepCallback =
    std::function<void(const SimState& prev, const SimState& cur, const StepInfo& info)>;
using StartCallback = std::function<void(const SimState& initial)>;

// March from the initial state to T_end with fixed dt (last step clipped).
SimState run(const GridSpec& grid, const ModelSpec& model, const InitialData& init, double dt,
             const StartCallback& on_start = nullptr, const StepCallback& on_step = nullptr);

}  // namespace chd
