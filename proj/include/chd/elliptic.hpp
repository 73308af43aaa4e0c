// Linear solves behind the time stepper: the mean-zero Neumann Poisson
// problem, the implicit diffusion (Helmholtz) step for theta, the coupled
// semi-implicit Cahn-Hilliard step, and the projected Brinkman solve.
//
// Everything is matrix-free conjugate gradients on the stencils from
// grid.hpp. The Cahn-Hilliard Schur complement is not symmetric in the plain
// inner product when the mobility varies, but it is self-adjoint positive
// definite in the inner product weighted by K = S0/eps - eps*Lap, so CG runs
// with K-weighted inner products there.

#pragma once

#include <functional>
#include <optional>

#include "chd/grid.hpp"

namespace chd {

struct LinSolveConfig {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    int max_iter = 0;  // 0 means 10 * (number of unknowns)

    int effective_max_iter(int n) const { return max_iter > 0 ? max_iter : 10 * n; }

    void validate() const {
        if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
            throw ConfigError("LinSolveConfig: tolerances must be positive");
        if (max_iter < 0) throw ConfigError("LinSolveConfig: max_iter must be >= 1 (or 0 for default)");
    }
};

struct SolveStats {
    int iterations = 0;
    double residual = 0.0;  // final two-norm of b - A x
    bool converged = true;
};

using ApplyFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Conjugate gradients for A x = b. `weight` (if given) supplies the SPD
// inner-product operator under which A is self-adjoint; `project_mean`
// re-centers the iterate and residual each iteration (Neumann null space).
SolveStats cg_solve(const ApplyFn& A, const Eigen::VectorXd& b, Eigen::VectorXd& x,
                    const LinSolveConfig& cfg, const ApplyFn* weight = nullptr,
                    bool project_mean = false);

// Mean-zero solution u of -div(coef grad u) = rhs with no-flux boundaries.
// The right-hand side must already have (numerically) zero mean.
class NeumannPoisson {
  public:
    explicit NeumannPoisson(const GridSpec& grid, LinSolveConfig cfg = {});
    NeumannPoisson(const GridSpec& grid, FaceField coef, LinSolveConfig cfg);

    ScalarField apply(const ScalarField& u) const;  // -div(coef grad u)
    ScalarField solve(const ScalarField& rhs, SolveStats* stats = nullptr) const;

  private:
    GridSpec grid_;
    std::optional<FaceField> coef_;
    LinSolveConfig cfg_;
};

ScalarField solve_poisson_neumann(const ScalarField& rhs, const LinSolveConfig& cfg,
                                  SolveStats* stats = nullptr);

// (I - dt div(coef grad)) theta_new = theta_old + dt * explicit_rhs.
ScalarField solve_theta_helmholtz(const ScalarField& theta_old, const FaceField& coef_face,
                                  double dt, const ScalarField& explicit_rhs,
                                  const LinSolveConfig& cfg, SolveStats* stats = nullptr);

// One stabilized IMEX Cahn-Hilliard step with mobility frozen on faces:
//
//   phi_new - dt div(m grad mu_new) = phi_old + dt explicit_rhs
//   mu_new = -eps Lap phi_new + (S0/eps)(phi_new - phi_old) + mu_explicit
//
// where mu_explicit carries the frozen chemistry (psi'(phi_old)/eps and the
// cross-coupling terms). Solved as a Schur complement in phi_new.
struct ChStepResult {
    ScalarField phi;
    ScalarField mu;
    SolveStats stats;
};

ChStepResult solve_ch_coupled(const ScalarField& phi_old, const FaceField& m_face, double dt,
                              double eps, double S0, const ScalarField& mu_explicit,
                              const ScalarField& explicit_rhs, const LinSolveConfig& cfg);

// Brinkman velocity by a Chorin-type splitting: a componentwise Helmholtz
// solve (eta Lap - K) v* = -force with no-slip walls, then a Neumann Poisson
// projection that restores div v = 0 exactly (up to solver tolerance).
// With eta = 0 the first stage degenerates to v* = force / K.
struct BrinkmanResult {
    FaceField v;
    ScalarField p;
    SolveStats momentum;
    SolveStats projection;
};

BrinkmanResult solve_brinkman(const FaceField& v_guess, double eta, double K,
                              const FaceField& force, const LinSolveConfig& cfg);

}  // namespace chd
