#include "chd/elliptic.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace chd {

namespace {

Eigen::VectorXd to_vec(const ScalarField& f) { return f.data.matrix(); }

ScalarField from_vec(const GridSpec& g, const Eigen::VectorXd& v) {
    ScalarField f(g);
    f.data = v.array();
    return f;
}

void project_zero_mean(Eigen::VectorXd& v) { v.array() -= v.mean(); }

[[noreturn]] void throw_not_converged(const char* what, const SolveStats& st) {
    throw SolverError(std::string(what) + ": CG did not converge in " +
                      std::to_string(st.iterations) +
                      " iterations, final residual = " + std::to_string(st.residual));
}

}  // namespace

SolveStats cg_solve(const ApplyFn& A, const Eigen::VectorXd& b, Eigen::VectorXd& x,
                    const LinSolveConfig& cfg, const ApplyFn* weight, bool project_mean) {
    cfg.validate();
    const int n = static_cast<int>(b.size());
    const int max_iter = cfg.effective_max_iter(n);

    if (project_mean) project_zero_mean(x);
    Eigen::VectorXd r = b - A(x);
    if (project_mean) project_zero_mean(r);

    const double tol = std::max(cfg.rel_tol * b.norm(), cfg.abs_tol);
    SolveStats st;
    st.residual = r.norm();
    if (st.residual <= tol) return st;

    auto weighted = [&](const Eigen::VectorXd& v) { return weight ? (*weight)(v) : v; };

    double rho = r.dot(weighted(r));
    Eigen::VectorXd p = r;
    for (int it = 1; it <= max_iter; ++it) {
        Eigen::VectorXd Ap = A(p);
        if (project_mean) project_zero_mean(Ap);
        const double pAp = p.dot(weighted(Ap));
        if (!(pAp > 0.0)) {  // lost positivity: bail out with the current iterate
            st.converged = false;
            st.iterations = it;
            break;
        }
        const double alpha = rho / pAp;
        x += alpha * p;
        r -= alpha * Ap;
        if (project_mean) {
            project_zero_mean(x);
            project_zero_mean(r);
        }
        st.iterations = it;
        st.residual = r.norm();
        if (st.residual <= tol) break;
        const double rho_next = r.dot(weighted(r));
        p = r + (rho_next / rho) * p;
        rho = rho_next;
    }

    // Report the true residual, not the recursively updated one.
    Eigen::VectorXd rt = b - A(x);
    if (project_mean) project_zero_mean(rt);
    st.residual = rt.norm();
    st.converged = st.residual <= 2.0 * tol;  // slack for recursive-residual drift
    return st;
}

NeumannPoisson::NeumannPoisson(const GridSpec& grid, LinSolveConfig cfg)
    : grid_(grid), cfg_(cfg) {}

NeumannPoisson::NeumannPoisson(const GridSpec& grid, FaceField coef, LinSolveConfig cfg)
    : grid_(grid), coef_(std::move(coef)), cfg_(cfg) {}

ScalarField NeumannPoisson::apply(const ScalarField& u) const {
    ScalarField out = coef_ ? weighted_laplacian(*coef_, u) : laplacian(u);
    out.data = -out.data;
    return out;
}

ScalarField NeumannPoisson::solve(const ScalarField& rhs, SolveStats* stats) const {
    const double nrm = l2_norm(rhs);
    if (nrm == 0.0) {
        if (stats) *stats = SolveStats{};
        return ScalarField(grid_);
    }
    if (std::abs(mean(rhs)) > 1e-10 * nrm)
        throw std::invalid_argument(
            "NeumannPoisson::solve: right-hand side has non-zero mean; the Neumann "
            "problem is only solvable for mean-zero data");

    ApplyFn A = [this](const Eigen::VectorXd& v) {
        return to_vec(apply(from_vec(grid_, v)));
    };
    Eigen::VectorXd x = Eigen::VectorXd::Zero(grid_.num_cells());
    SolveStats st = cg_solve(A, to_vec(rhs), x, cfg_, nullptr, /*project_mean=*/true);
    if (stats) *stats = st;
    if (!st.converged) throw_not_converged("NeumannPoisson::solve", st);
    return from_vec(grid_, x);
}

ScalarField solve_poisson_neumann(const ScalarField& rhs, const LinSolveConfig& cfg,
                                  SolveStats* stats) {
    return NeumannPoisson(rhs.grid, cfg).solve(rhs, stats);
}

ScalarField solve_theta_helmholtz(const ScalarField& theta_old, const FaceField& coef_face,
                                  double dt, const ScalarField& explicit_rhs,
                                  const LinSolveConfig& cfg, SolveStats* stats) {
    if (!(dt > 0.0)) throw std::invalid_argument("solve_theta_helmholtz: dt must be positive");
    const GridSpec& g = theta_old.grid;

    ApplyFn A = [&](const Eigen::VectorXd& v) {
        ScalarField th = from_vec(g, v);
        ScalarField diff = weighted_laplacian(coef_face, th);
        return (th.data - dt * diff.data).matrix().eval();
    };
    ScalarField b(g);
    b.data = theta_old.data + dt * explicit_rhs.data;

    Eigen::VectorXd x = to_vec(theta_old);
    SolveStats st = cg_solve(A, to_vec(b), x, cfg);
    if (stats) *stats = st;
    if (!st.converged) throw_not_converged("solve_theta_helmholtz", st);

    ScalarField theta = from_vec(g, x);
    // Diffusion is exactly conservative, so pin the mean to the right-hand
    // side's mean; the shift is bounded by the solver tolerance.
    theta.data += mean(b) - mean(theta);
    return theta;
}

ChStepResult solve_ch_coupled(const ScalarField& phi_old, const FaceField& m_face, double dt,
                              double eps, double S0, const ScalarField& mu_explicit,
                              const ScalarField& explicit_rhs, const LinSolveConfig& cfg) {
    if (!(dt > 0.0) || !(eps > 0.0))
        throw std::invalid_argument("solve_ch_coupled: dt and eps must be positive");
    if (S0 < 0.0) throw std::invalid_argument("solve_ch_coupled: S0 must be >= 0");
    const GridSpec& g = phi_old.grid;

    auto K0 = [&](const ScalarField& u) {
        ScalarField out = laplacian(u);
        out.data = -eps * out.data + (S0 / eps) * u.data;
        return out;
    };

    ApplyFn A = [&](const Eigen::VectorXd& v) {
        ScalarField phi = from_vec(g, v);
        ScalarField mu_part = K0(phi);
        ScalarField diff = weighted_laplacian(m_face, mu_part);
        return (phi.data - dt * diff.data).matrix().eval();
    };
    // With variable mobility the Schur operator is self-adjoint in the
    // K0-weighted inner product, not the plain one.
    ApplyFn W = [&](const Eigen::VectorXd& v) { return to_vec(K0(from_vec(g, v))); };

    ScalarField g_full(g);
    g_full.data = mu_explicit.data - (S0 / eps) * phi_old.data;

    ScalarField b(g);
    b.data = phi_old.data + dt * explicit_rhs.data +
             dt * weighted_laplacian(m_face, g_full).data;

    Eigen::VectorXd x = to_vec(phi_old);
    SolveStats st = cg_solve(A, to_vec(b), x, cfg, &W);
    if (!st.converged) throw_not_converged("solve_ch_coupled", st);

    ChStepResult out;
    out.stats = st;
    out.phi = from_vec(g, x);
    out.phi.data += mean(b) - mean(out.phi);  // exact discrete mass bookkeeping
    out.mu = K0(out.phi);
    out.mu.data += g_full.data;
    return out;
}

namespace {

// Vector Laplacian of face-normal velocity components under no-slip walls:
// Dirichlet zero on boundary-normal faces, ghost reflection across tangential
// walls so the wall-parallel velocity vanishes at the wall itself.
FaceField face_laplacian_noslip(const FaceField& v) {
    const GridSpec& g = v.grid;
    FaceField out(g);
    const double ihx2 = 1.0 / (g.hx * g.hx);
    const double ihy2 = g.dim == 2 ? 1.0 / (g.hy * g.hy) : 0.0;

    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) {
            double lap = (v.xf(i + 1, j) - 2.0 * v.xf(i, j) + v.xf(i - 1, j)) * ihx2;
            if (g.dim == 2) {
                if (j == 0)
                    lap += (v.xf(i, 1) - 3.0 * v.xf(i, 0)) * ihy2;
                else if (j == g.ny - 1)
                    lap += (v.xf(i, g.ny - 2) - 3.0 * v.xf(i, g.ny - 1)) * ihy2;
                else
                    lap += (v.xf(i, j + 1) - 2.0 * v.xf(i, j) + v.xf(i, j - 1)) * ihy2;
            }
            out.xf(i, j) = lap;
        }
    if (g.dim == 2)
        for (int j = 1; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                double lap = (v.yf(i, j + 1) - 2.0 * v.yf(i, j) + v.yf(i, j - 1)) * ihy2;
                if (i == 0)
                    lap += (v.yf(1, j) - 3.0 * v.yf(0, j)) * ihx2;
                else if (i == g.nx - 1)
                    lap += (v.yf(g.nx - 2, j) - 3.0 * v.yf(g.nx - 1, j)) * ihx2;
                else
                    lap += (v.yf(i + 1, j) - 2.0 * v.yf(i, j) + v.yf(i - 1, j)) * ihx2;
                out.yf(i, j) = lap;
            }
    return out;
}

Eigen::VectorXd pack_faces(const FaceField& v) {
    Eigen::VectorXd out(v.x_faces.size() + v.y_faces.size());
    out.head(v.x_faces.size()) = v.x_faces.matrix();
    if (v.y_faces.size()) out.tail(v.y_faces.size()) = v.y_faces.matrix();
    return out;
}

FaceField unpack_faces(const GridSpec& g, const Eigen::VectorXd& v) {
    FaceField out(g);
    out.x_faces = v.head(out.x_faces.size()).array();
    if (out.y_faces.size()) out.y_faces = v.tail(out.y_faces.size()).array();
    return out;
}

}  // namespace

BrinkmanResult solve_brinkman(const FaceField& v_guess, double eta, double K,
                              const FaceField& force, const LinSolveConfig& cfg) {
    if (eta < 0.0 || !(K > 0.0))
        throw std::invalid_argument("solve_brinkman: need eta >= 0 and K > 0");
    const GridSpec& g = force.grid;

    BrinkmanResult out;
    FaceField vstar(g);
    if (eta == 0.0) {
        vstar.x_faces = force.x_faces / K;
        if (g.dim == 2) vstar.y_faces = force.y_faces / K;
        vstar.zero_boundary();
    } else {
        FaceField b = force;
        b.zero_boundary();
        FaceField x0 = v_guess.grid.same_as(g) ? v_guess : FaceField(g);
        x0.zero_boundary();

        ApplyFn A = [&](const Eigen::VectorXd& v) {
            FaceField vf = unpack_faces(g, v);
            FaceField lap = face_laplacian_noslip(vf);
            FaceField res(g);
            res.x_faces = K * vf.x_faces - eta * lap.x_faces;
            if (g.dim == 2) res.y_faces = K * vf.y_faces - eta * lap.y_faces;
            // keep boundary-normal faces pinned at zero
            for (int j = 0; j < g.ny; ++j) {
                res.xf(0, j) = vf.xf(0, j);
                res.xf(g.nx, j) = vf.xf(g.nx, j);
            }
            if (g.dim == 2)
                for (int i = 0; i < g.nx; ++i) {
                    res.yf(i, 0) = vf.yf(i, 0);
                    res.yf(i, g.ny) = vf.yf(i, g.ny);
                }
            return pack_faces(res);
        };

        Eigen::VectorXd x = pack_faces(x0);
        SolveStats st = cg_solve(A, pack_faces(b), x, cfg);
        out.momentum = st;
        if (!st.converged) throw_not_converged("solve_brinkman(momentum)", st);
        vstar = unpack_faces(g, x);
        vstar.zero_boundary();
    }

    // Projection: -Lap ptilde = -K div(v*), Neumann, mean zero; then
    // v = v* - grad(ptilde) / K removes the divergence.
    ScalarField divv = div_face_to_cc(vstar);
    ScalarField rhs(g);
    rhs.data = -K * divv.data;
    rhs.data -= rhs.data.mean();  // telescoping already makes this ~0
    ScalarField ptilde = solve_poisson_neumann(rhs, cfg, &out.projection);

    FaceField gradp = grad_cc_to_face(ptilde);
    out.v = FaceField(g);
    out.v.x_faces = vstar.x_faces - gradp.x_faces / K;
    if (g.dim == 2) out.v.y_faces = vstar.y_faces - gradp.y_faces / K;
    out.v.zero_boundary();
    out.p = ptilde;
    return out;
}

}  // namespace chd
