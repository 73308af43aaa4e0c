#include <cmath>
#include <numbers>

#include "chd/elliptic.hpp"
#include "chd/potential.hpp"
#include "chd/rng.hpp"
#include "doctest.h"

using namespace chd;
using std::numbers::pi;

namespace {

ScalarField random_zero_mean(const GridSpec& g, std::uint64_t seed) {
    SplitMix64 rng(seed);
    ScalarField f(g);
    for (int k = 0; k < g.num_cells(); ++k) f(k) = rng.next_symmetric();
    f.data -= f.data.mean();
    return f;
}

}  // namespace

TEST_CASE("poisson: zero rhs, incompatible rhs, convergence failure") {
    GridSpec g = GridSpec::make_1d(32, 1.0);
    LinSolveConfig cfg;
    ScalarField zero(g);
    CHECK(solve_poisson_neumann(zero, cfg).data.abs().maxCoeff() == 0.0);

    ScalarField constant(g, 1.0);
    CHECK_THROWS_AS(solve_poisson_neumann(constant, cfg), std::invalid_argument);

    LinSolveConfig tight;
    tight.max_iter = 1;
    ScalarField rhs = random_zero_mean(g, 3);
    CHECK_THROWS_AS(solve_poisson_neumann(rhs, tight), SolverError);
}

TEST_CASE("poisson: manufactured cosine solution, second order") {
    auto solve_error = [](int nx) {
        GridSpec g = GridSpec::make_1d(nx, 1.0);
        LinSolveConfig cfg;
        cfg.rel_tol = 1e-12;
        ScalarField rhs = sample(g, [&g](double x) { return std::cos(pi * x / g.lx); });
        rhs.data -= rhs.data.mean();
        ScalarField u = solve_poisson_neumann(rhs, cfg);
        double lam = pi * pi / (g.lx * g.lx);
        ScalarField ref = sample(g, [&g, lam](double x) { return std::cos(pi * x / g.lx) / lam; });
        ref.data -= ref.data.mean();
        return (u.data - ref.data).abs().maxCoeff();
    };
    double e1 = solve_error(32), e2 = solve_error(64), e3 = solve_error(128);
    double p1 = std::log2(e1 / e2), p2 = std::log2(e2 / e3);
    CHECK(p1 >= 1.8);
    CHECK(p1 <= 2.2);
    CHECK(p2 >= 1.8);
    CHECK(p2 <= 2.2);

    // 2D product cosine
    GridSpec g2 = GridSpec::make_2d(48, 48, 1.0, 1.0);
    LinSolveConfig cfg;
    cfg.rel_tol = 1e-12;
    ScalarField rhs2 = sample(g2, [&g2](double x, double y) {
        return std::cos(pi * x / g2.lx) * std::cos(pi * y / g2.ly);
    });
    rhs2.data -= rhs2.data.mean();
    ScalarField u2 = solve_poisson_neumann(rhs2, cfg);
    double lam2 = 2.0 * pi * pi;
    CHECK((u2.data - rhs2.data / lam2).abs().maxCoeff() <= 5e-3);
}

TEST_CASE("poisson: inverse composed with operator is the identity") {
    GridSpec g = GridSpec::make_2d(16, 12, 1.0, 1.5);
    LinSolveConfig cfg;
    NeumannPoisson op(g, cfg);
    ScalarField f = random_zero_mean(g, 7);
    ScalarField u = op.solve(f);
    CHECK(std::abs(mean(u)) <= 1e-12);
    ScalarField back = op.apply(u);
    back.data -= f.data;
    CHECK(l2_norm(back) <= 1e-8 * l2_norm(f));
}

TEST_CASE("poisson: the solution operator is symmetric") {
    GridSpec g = GridSpec::make_1d(48, 1.0);
    LinSolveConfig cfg;
    cfg.rel_tol = 1e-11;
    NeumannPoisson op(g, cfg);
    for (std::uint64_t s = 0; s < 4; ++s) {
        ScalarField f = random_zero_mean(g, 100 + s);
        ScalarField h = random_zero_mean(g, 200 + s);
        double a = cell_inner(op.solve(f), h);
        double b = cell_inner(f, op.solve(h));
        CHECK(std::abs(a - b) <= 1e-8 * (std::abs(a) + std::abs(b) + 1e-30));
    }
}

TEST_CASE("theta helmholtz: constants, near-identity limit, eigen decay") {
    GridSpec g = GridSpec::make_1d(64, 1.0);
    FaceField n_face(g, 1.0);
    LinSolveConfig cfg;
    cfg.rel_tol = 1e-12;

    ScalarField theta0(g, 2.5);
    ScalarField zero(g);
    ScalarField out = solve_theta_helmholtz(theta0, n_face, 0.01, zero, cfg);
    CHECK((out.data - 2.5).abs().maxCoeff() <= 1e-12);

    // constant old state: theta_new = theta_old + dt rhs + O(dt^2)
    ScalarField rhs = sample(g, [](double x) { return std::sin(7.0 * x); });
    const double dt = 1e-6;
    ScalarField stepped = solve_theta_helmholtz(theta0, n_face, dt, rhs, cfg);
    ScalarField lap_rhs = laplacian(rhs);
    double err = (stepped.data - theta0.data - dt * rhs.data).abs().maxCoeff();
    CHECK(err <= 2.0 * dt * dt * lap_rhs.data.abs().maxCoeff() + 1e-13);

    // discrete eigenfunction: exact decay factor 1 / (1 + dt lambda_h)
    ScalarField cosf = sample(g, [&g](double x) { return std::cos(pi * x / g.lx); });
    const double dt2 = 0.01;
    double lam_h = 4.0 / (g.hx * g.hx) * std::pow(std::sin(pi * g.hx / (2.0 * g.lx)), 2);
    ScalarField dec = solve_theta_helmholtz(cosf, n_face, dt2, ScalarField(g), cfg);
    CHECK((dec.data - cosf.data / (1.0 + dt2 * lam_h)).abs().maxCoeff() <= 1e-9);
    // and the continuum eigenvalue matches to O(h^2)
    CHECK(lam_h == doctest::Approx(pi * pi).epsilon(4e-3));
}

TEST_CASE("coupled CH step: constants are exact fixed points") {
    GridSpec g = GridSpec::make_1d(32, 1.0);
    FaceField m_face(g, 1.0);
    ScalarField phi0(g, 0.4);
    ScalarField zeros(g);
    // psi' == 0 surrogate: mu_explicit = 0
    ChStepResult r = solve_ch_coupled(phi0, m_face, 1e-3, 0.05, 4.0, zeros, zeros, LinSolveConfig{});
    CHECK((r.phi.data - 0.4).abs().maxCoeff() <= 1e-14);
    CHECK(r.phi.data.size() == 32);
    CHECK(r.mu.data.abs().maxCoeff() <= 1e-12);
}

TEST_CASE("coupled CH step: discrete mass bookkeeping is exact") {
    GridSpec g = GridSpec::make_2d(12, 12, 1.0, 1.0);
    SplitMix64 rng(5);
    FaceField m_face(g, 1.0);
    for (auto& v : m_face.x_faces) v = 0.7 + 0.3 * rng.next_double();
    for (auto& v : m_face.y_faces) v = 0.7 + 0.3 * rng.next_double();

    ScalarField phi0(g);
    for (int k = 0; k < g.num_cells(); ++k) phi0(k) = rng.next_symmetric();
    ScalarField mu_ex(g);
    for (int k = 0; k < g.num_cells(); ++k) mu_ex(k) = rng.next_symmetric();
    ScalarField rhs(g);
    for (int k = 0; k < g.num_cells(); ++k) rhs(k) = rng.next_symmetric();

    const double dt = 1e-3;
    ChStepResult r = solve_ch_coupled(phi0, m_face, dt, 0.08, 4.0, mu_ex, rhs, LinSolveConfig{});
    double expected = mean(phi0) + dt * mean(rhs);
    CHECK(std::abs(mean(r.phi) - expected) <= 1e-12);
}

TEST_CASE("coupled CH step: near-equilibrium tanh profile barely moves") {
    const double eps = 0.05;
    GridSpec g = GridSpec::make_1d(160, 1.0);  // 8 cells per eps
    DoubleWell well = DoubleWell::normalized_quartic();
    ScalarField phi = sample(g, [eps](double x) { return std::tanh(3.0 * (x - 0.5) / (4.0 * eps)); });
    ScalarField mu_ex(g);
    for (int k = 0; k < g.num_cells(); ++k) mu_ex(k) = well.dpsi(phi(k)) / eps;
    ChStepResult r = solve_ch_coupled(phi, FaceField(g, 1.0), 1e-5, eps, 4.0, mu_ex,
                                      ScalarField(g), LinSolveConfig{});
    CHECK((r.phi.data - phi.data).abs().maxCoeff() <= 1e-3);
}

TEST_CASE("brinkman: zero force, divergence-free output, darcy degeneration") {
    GridSpec g = GridSpec::make_2d(24, 24, 1.0, 1.0);
    LinSolveConfig cfg;
    cfg.rel_tol = 1e-11;

    BrinkmanResult r0 = solve_brinkman(FaceField(g), 0.05, 1.0, FaceField(g), cfg);
    CHECK(r0.v.max_abs() == 0.0);
    CHECK(r0.p.data.abs().maxCoeff() == 0.0);

    // random smooth-ish force with zero boundary components
    SplitMix64 rng(17);
    ScalarField stream(g);
    for (int k = 0; k < g.num_cells(); ++k) stream(k) = rng.next_symmetric();
    FaceField force = grad_cc_to_face(stream);  // boundary faces zero
    force.x_faces *= 3.0;

    BrinkmanResult r = solve_brinkman(FaceField(g), 0.05, 2.0, force, cfg);
    ScalarField div = div_face_to_cc(r.v);
    CHECK(l2_norm(div) <= 1e-8 * std::max(1.0, l2_norm(r.v)));
    CHECK(std::abs(mean(r.p)) <= 1e-12);
    // no-slip: boundary-normal faces exactly zero
    for (int j = 0; j < g.ny; ++j) {
        CHECK(r.v.xf(0, j) == 0.0);
        CHECK(r.v.xf(g.nx, j) == 0.0);
    }

    // eta = 0 must reproduce the Darcy construction
    const double K = 2.0;
    BrinkmanResult rd = solve_brinkman(FaceField(g), 0.0, K, force, cfg);
    ScalarField rhs(g);
    rhs.data = -div_face_to_cc(force).data;
    rhs.data -= rhs.data.mean();
    ScalarField p = solve_poisson_neumann(rhs, cfg);
    FaceField gp = grad_cc_to_face(p);
    FaceField vref(g);
    vref.x_faces = (force.x_faces - gp.x_faces) / K;
    vref.y_faces = (force.y_faces - gp.y_faces) / K;
    vref.zero_boundary();
    double scale = std::max(1e-12, vref.max_abs());
    CHECK((rd.v.x_faces - vref.x_faces).abs().maxCoeff() <= 1e-8 * scale);
    CHECK((rd.v.y_faces - vref.y_faces).abs().maxCoeff() <= 1e-8 * scale);

    CHECK_THROWS_AS(solve_brinkman(FaceField(g), -1.0, 1.0, force, cfg), std::invalid_argument);
}

TEST_CASE("weighted CG handles the variable-mobility Schur operator") {
    GridSpec g = GridSpec::make_1d(48, 1.0);
    SplitMix64 rng(23);
    FaceField m_face(g, 1.0);
    for (int i = 1; i < g.nx; ++i) m_face.xf(i, 0) = 0.5 + rng.next_double();

    ScalarField phi0(g);
    for (int k = 0; k < g.num_cells(); ++k) phi0(k) = rng.next_symmetric();
    ScalarField mu_ex(g);
    for (int k = 0; k < g.num_cells(); ++k) mu_ex(k) = rng.next_symmetric();

    const double dt = 5e-4, eps = 0.05, S0 = 4.0;
    ChStepResult r = solve_ch_coupled(phi0, m_face, dt, eps, S0, mu_ex, ScalarField(g),
                                      LinSolveConfig{});
    // residual check against the defining equations
    ScalarField resid(g);
    resid.data = r.phi.data - dt * weighted_laplacian(m_face, r.mu).data - phi0.data;
    CHECK(l2_norm(resid) <= 1e-7 * std::max(1.0, l2_norm(r.phi)));
    ScalarField mu_check = laplacian(r.phi);
    mu_check.data = -eps * mu_check.data + (S0 / eps) * (r.phi.data - phi0.data) + mu_ex.data;
    CHECK((mu_check.data - r.mu.data).abs().maxCoeff() <= 1e-10);
}
