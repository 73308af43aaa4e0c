#include <cmath>
#include <numbers>

#include "chd/grid.hpp"
#include "chd/rng.hpp"
#include "doctest.h"

using namespace chd;
using std::numbers::pi;

namespace {

FaceField random_zero_boundary_faces(const GridSpec& g, std::uint64_t seed) {
    SplitMix64 rng(seed);
    FaceField F(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) F.xf(i, j) = rng.next_symmetric();
    if (g.dim == 2)
        for (int j = 1; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) F.yf(i, j) = rng.next_symmetric();
    return F;
}

ScalarField random_field(const GridSpec& g, std::uint64_t seed) {
    SplitMix64 rng(seed);
    ScalarField c(g);
    for (int k = 0; k < g.num_cells(); ++k) c(k) = rng.next_symmetric();
    return c;
}

}  // namespace

TEST_CASE("grid spec invariants") {
    CHECK_THROWS_AS(GridSpec::make_1d(3, 1.0), ConfigError);
    CHECK_THROWS_AS(GridSpec::make_2d(8, 3, 1.0, 1.0), ConfigError);
    CHECK_THROWS_AS(GridSpec::make_1d(8, -1.0), ConfigError);
    GridSpec g = GridSpec::make_1d(10, 2.0);
    CHECK(g.hx == doctest::Approx(0.2));
    CHECK(g.hy == 1.0);
    CHECK(g.cell_volume() == doctest::Approx(0.2));
    GridSpec g2 = GridSpec::make_2d(8, 16, 1.0, 2.0);
    CHECK(g2.cell_volume() == doctest::Approx(0.125 * 0.125));
}

TEST_CASE("mean: constants, split field, linear profile") {
    GridSpec g = GridSpec::make_1d(10, 1.0);
    ScalarField c(g, 3.25);
    CHECK(mean(c) == doctest::Approx(3.25).epsilon(1e-15));

    ScalarField pm(g);
    for (int i = 0; i < 10; ++i) pm(i) = i < 5 ? -1.0 : 1.0;
    CHECK(mean(pm) == doctest::Approx(0.0).epsilon(1e-15));

    // f(x) = x sampled at the 10 cell centers of [0,1] averages to exactly 1/2
    ScalarField lin = sample(g, [](double x) { return x; });
    CHECK(mean(lin) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("grad_cc_to_face: constants, ramp, checkerboard") {
    GridSpec g = GridSpec::make_1d(8, 1.0);
    FaceField gz = grad_cc_to_face(ScalarField(g, 7.0));
    CHECK(gz.x_faces.abs().maxCoeff() == 0.0);

    ScalarField ramp(g);
    for (int i = 0; i < g.nx; ++i) ramp(i) = i * g.hx;
    FaceField gr = grad_cc_to_face(ramp);
    CHECK(gr.xf(0, 0) == 0.0);
    CHECK(gr.xf(g.nx, 0) == 0.0);
    for (int i = 1; i < g.nx; ++i) CHECK(gr.xf(i, 0) == doctest::Approx(1.0).epsilon(1e-14));

    GridSpec gc = GridSpec::make_1d(6, 3.0);  // hx = 0.5
    ScalarField check(gc);
    for (int i = 0; i < 6; ++i) check(i) = (i % 2 == 0) ? 1.0 : -1.0;
    FaceField gch = grad_cc_to_face(check);
    for (int i = 1; i < 6; ++i)
        CHECK(gch.xf(i, 0) == doctest::Approx(i % 2 == 1 ? -4.0 : 4.0));
}

TEST_CASE("div_face_to_cc: zeros, discrete divergence theorem, quadratic") {
    GridSpec g = GridSpec::make_1d(16, 1.0);
    CHECK(div_face_to_cc(FaceField(g)).data.abs().maxCoeff() == 0.0);

    FaceField F = random_zero_boundary_faces(g, 11);
    ScalarField d = div_face_to_cc(F);
    CHECK(std::abs(d.data.sum()) * g.cell_volume() <= 1e-14);

    // interior faces carry 2 x_face (the gradient of x^2); interior cells see 2
    FaceField q(g);
    for (int i = 1; i < g.nx; ++i) q.xf(i, 0) = 2.0 * i * g.hx;
    ScalarField dq = div_face_to_cc(q);
    for (int i = 1; i + 1 < g.nx; ++i) CHECK(dq(i) == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("face_interp: constants, midpoint, monotone") {
    GridSpec g = GridSpec::make_1d(4, 1.0);
    FaceField fc = face_interp(ScalarField(g, 2.5));
    CHECK(fc.x_faces.minCoeff() == doctest::Approx(2.5));
    CHECK(fc.x_faces.maxCoeff() == doctest::Approx(2.5));

    ScalarField two(g);
    two(0) = 0.0;
    two(1) = 2.0;
    two(2) = 4.0;
    two(3) = 6.0;
    FaceField fi = face_interp(two);
    CHECK(fi.xf(1, 0) == doctest::Approx(1.0));
    CHECK(fi.xf(0, 0) == doctest::Approx(0.0));
    CHECK(fi.xf(4, 0) == doctest::Approx(6.0));

    // monotone cell data gives monotone face data
    GridSpec gm = GridSpec::make_1d(64, 1.0);
    SplitMix64 rng(123);
    for (int rep = 0; rep < 20; ++rep) {
        ScalarField m(gm);
        double acc = -1.0;
        for (int i = 0; i < gm.nx; ++i) {
            acc += rng.next_double();
            m(i) = acc;
        }
        FaceField f = face_interp(m);
        for (int i = 0; i + 1 <= gm.nx; ++i)
            CHECK(f.x_faces[i] <= f.x_faces[i + 1] + 1e-14);
    }
}

TEST_CASE("weighted_laplacian: kernel, eigenfunction accuracy, zero mean, bad coef") {
    GridSpec g = GridSpec::make_1d(32, 1.0);
    FaceField ones(g, 1.0);
    CHECK(weighted_laplacian(ones, ScalarField(g, 4.0)).data.abs().maxCoeff() <= 1e-14);

    // cos(pi x / lx) is a discrete eigenfunction of the closed operator;
    // the eigenvalue converges at second order.
    auto eigen_error = [](int nx) {
        GridSpec gg = GridSpec::make_1d(nx, 1.0);
        ScalarField c = sample(gg, [&gg](double x) { return std::cos(pi * x / gg.lx); });
        ScalarField lap = weighted_laplacian(FaceField(gg, 1.0), c);
        double lam = pi * pi / (gg.lx * gg.lx);
        return (lap.data + lam * c.data).abs().maxCoeff();
    };
    double e1 = eigen_error(32), e2 = eigen_error(64), e3 = eigen_error(128);
    double p1 = std::log2(e1 / e2), p2 = std::log2(e2 / e3);
    CHECK(p1 == doctest::Approx(2.0).epsilon(0.1));
    CHECK(p2 == doctest::Approx(2.0).epsilon(0.1));

    // no-flux telescoping: zero sum for arbitrary positive coefficients
    GridSpec g2 = GridSpec::make_2d(12, 10, 1.0, 2.0);
    SplitMix64 rng(9);
    FaceField coef(g2, 1.0);
    for (auto& v : coef.x_faces) v = 0.5 + rng.next_double();
    for (auto& v : coef.y_faces) v = 0.5 + rng.next_double();
    ScalarField c2 = random_field(g2, 10);
    ScalarField wl = weighted_laplacian(coef, c2);
    CHECK(std::abs(mean(wl)) <= 1e-13);

    FaceField bad(g, 1.0);
    bad.xf(3, 0) = 0.0;
    CHECK_THROWS_AS(weighted_laplacian(bad, ScalarField(g, 1.0)), ConfigError);
}

TEST_CASE("upwind_advect: zero velocity, constant transport, conservation") {
    GridSpec g = GridSpec::make_1d(24, 1.0);
    ScalarField c = random_field(g, 5);
    CHECK(upwind_advect(c, FaceField(g)).data.abs().maxCoeff() == 0.0);

    // upwinding a constant is exact: div(kappa v) = kappa div(v)
    FaceField v = random_zero_boundary_faces(g, 21);
    const double kappa = 2.75;
    ScalarField cc(g, kappa);
    ScalarField adv = upwind_advect(cc, v);
    ScalarField H = div_face_to_cc(v);
    CHECK((adv.data - kappa * H.data).abs().maxCoeff() <= 1e-14);

    GridSpec g2 = GridSpec::make_2d(9, 7, 1.0, 1.3);
    FaceField v2 = random_zero_boundary_faces(g2, 31);
    ScalarField c2 = random_field(g2, 32);
    ScalarField a2 = upwind_advect(c2, v2);
    CHECK(std::abs(a2.data.sum() * g2.cell_volume()) <= 1e-14);
}

TEST_CASE("summation by parts: <div F, c> = -<F, grad c> exactly") {
    for (int dim = 1; dim <= 2; ++dim) {
        GridSpec g = dim == 2 ? GridSpec::make_2d(13, 11, 1.7, 0.9)
                              : GridSpec::make_1d(37, 2.3);
        for (std::uint64_t seed = 0; seed < 8; ++seed) {
            FaceField F = random_zero_boundary_faces(g, 100 + seed);
            ScalarField c = random_field(g, 200 + seed);
            double lhs = cell_inner(div_face_to_cc(F), c);
            double rhs = -face_inner(F, grad_cc_to_face(c));
            double scale = std::abs(lhs) + std::abs(rhs) + 1e-30;
            CHECK(std::abs(lhs - rhs) / scale <= 1e-12);
        }
    }
}

TEST_CASE("laplacian matches the 3-point / 5-point stencil") {
    GridSpec g = GridSpec::make_2d(8, 6, 1.0, 1.0);
    ScalarField c = random_field(g, 77);
    ScalarField lap = laplacian(c);
    auto at = [&](int i, int j) {  // mirror ghost = Neumann closure
        i = std::clamp(i, 0, g.nx - 1);
        j = std::clamp(j, 0, g.ny - 1);
        return c(i, j);
    };
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            double ref = (at(i + 1, j) - 2.0 * c(i, j) + at(i - 1, j)) / (g.hx * g.hx) +
                         (at(i, j + 1) - 2.0 * c(i, j) + at(i, j - 1)) / (g.hy * g.hy);
            // boundary cells: the zero-flux face removes one arm
            CHECK(lap(i, j) == doctest::Approx(ref).epsilon(1e-12));
        }
}
