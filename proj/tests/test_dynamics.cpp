#include <cmath>
#include <numbers>

#include "chd/diagnostics.hpp"
#include "chd/dynamics.hpp"
#include "doctest.h"

using namespace chd;
using std::numbers::pi;

namespace {

ModelSpec basic_model(double eps, Variant variant = Variant::ZeroVelocity) {
    ModelSpec m;
    m.eps = eps;
    m.variant = variant;
    m.T_end = 0.0;
    return m;
}

double mean_product(const ScalarField& a, const ScalarField& b) {
    return (a.data * b.data).sum() / a.grid.num_cells();
}

}  // namespace

TEST_CASE("model validation: mobilities, variants, H restrictions") {
    ModelSpec m = basic_model(0.05);
    CHECK_NOTHROW(m.validate());

    ModelSpec bad = m;
    bad.mobility_m = [](double s) { return s; };  // vanishes at 0
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    ModelSpec brink = basic_model(0.05, Variant::Brinkman);
    CHECK_THROWS_AS(brink.validate(), ConfigError);  // eta missing
    brink.eta = 0.1;
    CHECK_NOTHROW(brink.validate());
    brink.sources.H = [](double, double, double) { return 1.0; };
    CHECK_THROWS_AS(brink.validate(), ConfigError);

    ModelSpec zv = basic_model(0.05);
    zv.sources.H = [](double, double, double) { return 1.0; };
    CHECK_THROWS_AS(zv.validate(), ConfigError);

    ModelSpec scaled = basic_model(0.04, Variant::BrinkmanScaled);
    scaled.beta = 2.0;
    CHECK_NOTHROW(scaled.validate());
    CHECK(scaled.effective_eta() == doctest::Approx(0.0016));
}

TEST_CASE("initial data: means, determinism, error paths") {
    GridSpec g = GridSpec::make_1d(128, 1.0);
    ModelSpec m = basic_model(0.05);

    InitialData strip;
    strip.kind = InitialData::Kind::TanhStrip;
    strip.u0 = 0.0;
    SimState st = make_initial_state(g, m, strip);
    CHECK(std::abs(mean(st.phi) - 0.0) <= 1e-6);
    CHECK(st.phi.data.maxCoeff() <= 1.0);
    CHECK(st.phi.data.minCoeff() >= -1.0);

    InitialData rnd;
    rnd.kind = InitialData::Kind::RandomPerturbation;
    rnd.amplitude = 0.1;
    rnd.u0 = 0.2;
    CHECK_THROWS_AS(make_initial_state(g, m, rnd), ConfigError);  // seed required
    rnd.seed = 42;
    rnd.seed_set = true;
    SimState s1 = make_initial_state(g, m, rnd);
    SimState s2 = make_initial_state(g, m, rnd);
    CHECK((s1.phi.data == s2.phi.data).all());
    CHECK(std::abs(mean(s1.phi) - 0.2) <= 1e-6);

    InitialData badmean = strip;
    badmean.u0 = 1.5;
    CHECK_THROWS_AS(make_initial_state(g, m, badmean), ConfigError);
}

TEST_CASE("darcy velocity: trivial and manufactured source cases") {
    GridSpec g = GridSpec::make_1d(64, 1.0);
    ModelSpec m = basic_model(0.05, Variant::Darcy);
    m.K = 2.0;

    SimState st;
    st.phi = ScalarField(g, 1.0);
    st.mu = ScalarField(g, 0.0);
    st.theta = ScalarField(g);
    st.p = ScalarField(g);
    st.v = FaceField(g);

    VelocityResult vr = compute_velocity_darcy(st, m);
    CHECK(vr.v.max_abs() <= 1e-12);
    CHECK(vr.p.data.abs().maxCoeff() <= 1e-12);

    // phi constant, H = cos(pi x): v = -grad p / K with div v = H
    m.sources.H = [&g](double x, double, double) { return std::cos(pi * x / g.lx); };
    VelocityResult vh = compute_velocity_darcy(st, m);
    ScalarField H = m.sources.sample_H(g, 0.0);
    ScalarField div = div_face_to_cc(vh.v);
    div.data -= H.data;
    CHECK(l2_norm(div) <= 1e-7 * (1.0 + l2_norm(H)));
    CHECK(std::abs(mean(div_face_to_cc(vh.v))) <= 1e-13);
}

TEST_CASE("pure-phase equilibrium is a fixed point of step") {
    GridSpec g = GridSpec::make_1d(32, 1.0);
    ModelSpec m = basic_model(0.05);
    m.T_end = 1.0;

    SimState st;
    st.phi = ScalarField(g, 1.0);
    st.theta = ScalarField(g);
    st.mu = ScalarField(g);  // dpsi(1) = 0, so mu = 0 is consistent
    st.p = ScalarField(g);
    st.v = FaceField(g);

    SimState next = step(st, m, 1e-3);
    CHECK((next.phi.data - 1.0).abs().maxCoeff() <= 1e-12);
    CHECK(next.theta.data.abs().maxCoeff() <= 1e-12);
    CHECK(next.mu.data.abs().maxCoeff() <= 1e-12);
}

TEST_CASE("one-step mass identities for phi and theta") {
    GridSpec g = GridSpec::make_1d(96, 1.0);
    ModelSpec m = basic_model(0.04);
    m.chi = 0.3;
    m.T_end = 1.0;
    m.sources.U = [&g](double x, double) { return 0.4 * std::cos(pi * x / g.lx); };
    m.sources.S = [&g](double x, double, double) { return 0.2 * std::cos(2.0 * pi * x / g.lx); };

    InitialData init;
    init.kind = InitialData::Kind::TanhStrip;
    init.u0 = 0.1;
    SimState st = make_initial_state(g, m, init);

    const double dt = 2e-4;
    ScalarField U = m.sources.sample_U(g);
    ScalarField S = m.sources.sample_S(g, st.t);
    double expected_phi = mean(st.phi) + dt * mean_product(U, st.phi);
    double expected_sigma = mean(st.theta) + m.chi * mean(st.phi) + dt * mean(S);

    SimState next = step(st, m, dt);
    CHECK(std::abs(mean(next.phi) - expected_phi) <= 1e-9);
    CHECK(std::abs(mean(next.theta) + m.chi * mean(next.phi) - expected_sigma) <= 1e-9);
}

TEST_CASE("cumulative mass drift matches the source integral; mean bound holds") {
    GridSpec g = GridSpec::make_1d(80, 1.0);
    ModelSpec m = basic_model(0.05);
    m.T_end = 0.02;
    m.sources.U = [&g](double x, double) { return 0.5 * std::cos(pi * x / g.lx); };

    InitialData init;
    init.kind = InitialData::Kind::TanhStrip;
    init.u0 = 0.0;

    ScalarField U = m.sources.sample_U(g);
    const double supU = U.data.abs().maxCoeff();
    double drift_integral = 0.0;
    long steps = 0;
    bool bound_ok = true;
    auto on_step = [&](const SimState& prev, const SimState& cur, const StepInfo&) {
        drift_integral += (cur.t - prev.t) * mean(ScalarField{[&] {
                              ScalarField f(g);
                              f.data = U.data * prev.phi.data;
                              return f;
                          }()});
        ++steps;
        bound_ok = bound_ok &&
                   std::abs(mean(cur.phi)) <= std::abs(init.u0) + cur.t * supU + 1e-7;
    };
    SimState final_state = run(g, m, init, 1e-4, nullptr, on_step);
    CHECK(steps == 200);
    CHECK(std::abs(mean(final_state.phi) - init.u0 - drift_integral) <= steps * 1e-9);
    CHECK(bound_ok);

    // with U = 0 the mean is conserved essentially to roundoff
    ModelSpec m0 = basic_model(0.05);
    m0.T_end = 0.02;
    double u0_mean = 0.0;
    auto on_start = [&](const SimState& s0) { u0_mean = mean(s0.phi); };
    SimState fin0 = run(g, m0, init, 1e-4, on_start);
    CHECK(std::abs(mean(fin0.phi) - u0_mean) <= 1e-9);
}

TEST_CASE("CFL violation and divergence are reported as solver errors") {
    GridSpec g = GridSpec::make_1d(64, 1.0);
    ModelSpec m = basic_model(0.05, Variant::Darcy);
    m.T_end = 1.0;
    m.sources.H = [&g](double x, double, double) { return 20.0 * std::cos(pi * x / g.lx); };

    InitialData init;
    init.kind = InitialData::Kind::TanhStrip;
    init.u0 = 0.0;
    SimState st = make_initial_state(g, m, init);
    CHECK_THROWS_AS(step(st, m, 0.5), SolverError);
}

TEST_CASE("run: T = 0 returns the initial state; reruns are bitwise identical") {
    GridSpec g = GridSpec::make_1d(48, 1.0);
    ModelSpec m = basic_model(0.06);
    m.T_end = 0.0;

    InitialData init;
    init.kind = InitialData::Kind::RandomPerturbation;
    init.amplitude = 0.2;
    init.seed = 9;
    init.seed_set = true;
    init.u0 = 0.0;

    int starts = 0, records = 0;
    SimState fin = run(g, m, init, 1e-4,
                       [&](const SimState&) { ++starts; },
                       [&](const SimState&, const SimState&, const StepInfo&) { ++records; });
    CHECK(starts == 1);
    CHECK(records == 0);
    CHECK(fin.t == 0.0);

    m.T_end = 0.005;
    SimState a = run(g, m, init, 1e-4);
    SimState b = run(g, m, init, 1e-4);
    CHECK((a.phi.data == b.phi.data).all());
    CHECK((a.theta.data == b.theta.data).all());
    CHECK(a.t == b.t);
}

TEST_CASE("run rejects an inadmissible terminal time") {
    GridSpec g = GridSpec::make_1d(48, 1.0);
    ModelSpec m = basic_model(0.06);
    m.T_end = 10.0;
    m.sources.U = [&g](double x, double) { return 0.1 * std::cos(pi * x / g.lx); };
    InitialData init;
    init.u0 = 0.5;  // 0.5 + 10 * 0.1 = 1.5 >= 1
    CHECK_THROWS_WITH_AS(run(g, m, init, 1e-3),
                         doctest::Contains("terminal-time condition"), ConfigError);
}

TEST_CASE("brinkman velocity is divergence free during a run") {
    GridSpec g = GridSpec::make_2d(24, 24, 1.0, 1.0);
    ModelSpec m = basic_model(0.1, Variant::Brinkman);
    m.eta = 0.05;
    m.chi = 0.1;
    m.T_end = 1.0;

    InitialData init;
    init.kind = InitialData::Kind::TanhCircle;
    init.radius = 0.25;
    init.u0 = -0.5;
    // circle of +1 in a -1 background on the unit square: area pi r^2 gives
    // mean 2 pi r^2 - 1, about -0.6; ask for -0.5 and let the shift settle it
    SimState st = make_initial_state(g, m, init);
    SimState next = step(st, m, 1e-4);
    ScalarField div = div_face_to_cc(next.v);
    CHECK(l2_norm(div) <= 1e-7 * std::max(1.0, l2_norm(next.v)));
}
