#include "chd/dynamics.hpp"

#include <cmath>

#include "chd/rng.hpp"

namespace chd {

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::Darcy: return "darcy";
        case Variant::Brinkman: return "brinkman";
        case Variant::BrinkmanScaled: return "brinkman_scaled";
        case Variant::ZeroVelocity: return "zero_velocity";
    }
    return "?";
}

ScalarField SourceSpec::sample_U(const GridSpec& g) const {
    if (!U) return ScalarField(g);
    ScalarField f = sample(g, [this, &g](double x, double y) { return U(x, y); });
    f.data -= f.data.mean();
    return f;
}

ScalarField SourceSpec::sample_S(const GridSpec& g, double t) const {
    if (!S) return ScalarField(g);
    return sample(g, [this, t](double x, double y) { return S(x, y, t); });
}

ScalarField SourceSpec::sample_H(const GridSpec& g, double t) const {
    if (!H) return ScalarField(g);
    ScalarField f = sample(g, [this, t](double x, double y) { return H(x, y, t); });
    f.data -= f.data.mean();
    return f;
}

double SourceSpec::sup_norm_U(const GridSpec& g) const {
    if (!U) return 0.0;
    ScalarField f = sample_U(g);
    return f.data.abs().maxCoeff();
}

double ModelSpec::effective_eta() const {
    if (variant == Variant::Brinkman) return eta;
    if (variant == Variant::BrinkmanScaled) return std::pow(eps, beta);
    return 0.0;
}

void ModelSpec::validate() const {
    if (!(eps > 0.0)) throw ConfigError("model: eps must be positive");
    if (chi < 0.0) throw ConfigError("model: chi must be >= 0");
    if (!(K > 0.0)) throw ConfigError("model: K must be positive");
    if (T_end < 0.0) throw ConfigError("model: T must be >= 0");
    if (S0 < 0.0) throw ConfigError("model: S0 must be >= 0");
    if (variant == Variant::Brinkman && !(eta > 0.0))
        throw ConfigError("model: Brinkman variant requires eta > 0");
    if (variant == Variant::BrinkmanScaled && !(beta > 0.0))
        throw ConfigError("model: scaled Brinkman requires beta > 0");
    if (variant != Variant::Darcy && sources.has_H())
        throw ConfigError("model: a velocity source H is only admissible for the Darcy "
                          "variant (the " + variant_name(variant) + " flow is solenoidal)");
    // Mobility bound scan on [-2, 2].
    for (int k = 0; k <= 4000; ++k) {
        double s = -2.0 + k * 1e-3;
        double m = mob_m(s), n = mob_n(s);
        if (!(m > 0.0) || !std::isfinite(m) || !(n > 0.0) || !std::isfinite(n))
            throw ConfigError("model: mobility bound violated at s = " + std::to_string(s) +
                              " (mobilities must be positive and bounded)");
    }
    lin.validate();
}

namespace {

FaceField mobility_on_faces(const ScalarField& phi, const std::function<double(double)>& mob) {
    if (!mob) return FaceField(phi.grid, 1.0);
    ScalarField cellwise(phi.grid);
    cellwise.data = phi.data.unaryExpr([&mob](double s) { return mob(s); });
    return face_interp(cellwise);
}

// Face force (mu + chi*theta + chi^2*phi) * grad(phi).
FaceField capillary_force(const SimState& st, const ModelSpec& model) {
    ScalarField coeff(st.phi.grid);
    coeff.data = st.mu.data + model.chi * st.theta.data + model.chi * model.chi * st.phi.data;
    FaceField f = face_interp(coeff);
    FaceField gphi = grad_cc_to_face(st.phi);
    f.x_faces *= gphi.x_faces;
    if (st.phi.grid.dim == 2) f.y_faces *= gphi.y_faces;
    return f;
}

}  // namespace

VelocityResult compute_velocity_darcy(const SimState& state, const ModelSpec& model) {
    const GridSpec& g = state.phi.grid;
    FaceField force = capillary_force(state, model);
    ScalarField H = model.sources.sample_H(g, state.t);

    ScalarField rhs(g);
    rhs.data = model.K * H.data - div_face_to_cc(force).data;
    VelocityResult out;
    out.rhs_projection = std::abs(mean(rhs));
    rhs.data -= rhs.data.mean();

    ScalarField p = NeumannPoisson(g, model.lin).solve(rhs, &out.stats);
    FaceField gradp = grad_cc_to_face(p);
    out.v = FaceField(g);
    out.v.x_faces = (force.x_faces - gradp.x_faces) / model.K;
    if (g.dim == 2) out.v.y_faces = (force.y_faces - gradp.y_faces) / model.K;
    out.v.zero_boundary();
    out.p = p;
    return out;
}

VelocityResult compute_velocity_brinkman(const SimState& state, const ModelSpec& model) {
    if (model.variant != Variant::Brinkman && model.variant != Variant::BrinkmanScaled)
        throw ConfigError("compute_velocity_brinkman: wrong variant");
    FaceField force = capillary_force(state, model);
    BrinkmanResult br = solve_brinkman(state.v, model.effective_eta(), model.K, force, model.lin);
    VelocityResult out;
    out.v = std::move(br.v);
    out.p = std::move(br.p);
    out.stats = br.momentum.iterations > 0 ? br.momentum : br.projection;
    return out;
}

SimState make_initial_state(const GridSpec& grid, const ModelSpec& model,
                            const InitialData& init) {
    if (!(init.u0 > -1.0) || !(init.u0 < 1.0))
        throw ConfigError("initial data: the mean u0 must lie strictly inside (-1, 1)");

    SimState st;
    st.phi = ScalarField(grid);
    const double w = 3.0 / (4.0 * model.eps);  // tanh profile slope for the quartic well

    switch (init.kind) {
        case InitialData::Kind::TanhStrip: {
            double nxn = init.normal_x, nyn = grid.dim == 2 ? init.normal_y : 0.0;
            double len = std::hypot(nxn, nyn);
            if (!(len > 0.0)) throw ConfigError("initial data: strip normal must be non-zero");
            nxn /= len;
            nyn /= len;
            for (int j = 0; j < grid.ny; ++j)
                for (int i = 0; i < grid.nx; ++i) {
                    double d = (grid.xc(i) - init.center_x) * nxn +
                               (grid.yc(j) - init.center_y) * nyn;
                    st.phi(i, j) = std::tanh(w * d);
                }
            break;
        }
        case InitialData::Kind::TanhCircle: {
            if (!(init.radius > 0.0)) throw ConfigError("initial data: radius must be positive");
            for (int j = 0; j < grid.ny; ++j)
                for (int i = 0; i < grid.nx; ++i) {
                    double dx = grid.xc(i) - init.center_x;
                    double dy = grid.dim == 2 ? grid.yc(j) - init.center_y : 0.0;
                    double d = init.radius - std::hypot(dx, dy);
                    st.phi(i, j) = std::tanh(w * d);  // +1 inside
                }
            break;
        }
        case InitialData::Kind::RandomPerturbation: {
            if (!init.seed_set)
                throw ConfigError("initial data: random perturbation requires a seed");
            SplitMix64 rng(init.seed);
            for (int c = 0; c < grid.num_cells(); ++c)
                st.phi(c) = init.u0 + init.amplitude * rng.next_symmetric();
            break;
        }
    }

    // Affine shift (clamped to the physical range) until the mean hits u0.
    for (int it = 0; it < 256; ++it) {
        double m = mean(st.phi);
        if (std::abs(m - init.u0) <= 1e-7) break;
        st.phi.data += init.u0 - m;
        st.phi.data = st.phi.data.min(1.0).max(-1.0);
    }
    if (std::abs(mean(st.phi) - init.u0) > 1e-6)
        throw ConfigError("initial data: could not reach the requested mean u0 = " +
                          std::to_string(init.u0) + " by shifting (got " +
                          std::to_string(mean(st.phi)) + ")");

    st.theta = ScalarField(grid, init.theta0);

    // Consistent initial chemical potential.
    ScalarField lap = laplacian(st.phi);
    st.mu = ScalarField(grid);
    for (int c = 0; c < grid.num_cells(); ++c)
        st.mu(c) = model.potential.dpsi(st.phi(c)) / model.eps;
    st.mu.data += -model.eps * lap.data - model.chi * st.theta.data -
                  model.chi * model.chi * st.phi.data;

    st.t = 0.0;
    st.step = 0;
    if (model.variant == Variant::ZeroVelocity) {
        st.v = FaceField(grid);
        st.p = ScalarField(grid);
    } else if (model.variant == Variant::Darcy) {
        st.v = FaceField(grid);
        VelocityResult vr = compute_velocity_darcy(st, model);
        st.v = std::move(vr.v);
        st.p = std::move(vr.p);
    } else {
        st.v = FaceField(grid);
        VelocityResult vr = compute_velocity_brinkman(st, model);
        st.v = std::move(vr.v);
        st.p = std::move(vr.p);
    }
    return st;
}

SimState step(const SimState& state, const ModelSpec& model, double dt, StepInfo* info) {
    if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
    const GridSpec& g = state.phi.grid;
    StepInfo local;

    // (1) velocity from the old state
    FaceField v(g);
    ScalarField p(g);
    if (model.variant == Variant::Darcy) {
        VelocityResult vr = compute_velocity_darcy(state, model);
        v = std::move(vr.v);
        p = std::move(vr.p);
        local.velocity = vr.stats;
        local.rhs_projection = vr.rhs_projection;
    } else if (model.variant != Variant::ZeroVelocity) {
        VelocityResult vr = compute_velocity_brinkman(state, model);
        v = std::move(vr.v);
        p = std::move(vr.p);
        local.velocity = vr.stats;
    }

    local.cfl = dt * v.max_abs() / g.min_h();
    if (local.cfl > 0.5)
        throw SolverError("step " + std::to_string(state.step) + ": advective CFL " +
                          std::to_string(local.cfl) + " exceeds 0.5; reduce dt");

    // (2) Cahn-Hilliard update
    FaceField m_face = mobility_on_faces(state.phi, model.mobility_m);
    ScalarField U = model.sources.sample_U(g);
    ScalarField ch_rhs(g);
    ch_rhs.data = -upwind_advect(state.phi, v).data + U.data * state.phi.data;

    ScalarField mu_explicit(g);
    for (int c = 0; c < g.num_cells(); ++c)
        mu_explicit(c) = model.potential.dpsi(state.phi(c)) / model.eps;
    mu_explicit.data += -model.chi * state.theta.data -
                        model.chi * model.chi * state.phi.data;

    ChStepResult ch = solve_ch_coupled(state.phi, m_face, dt, model.eps, model.S0, mu_explicit,
                                       ch_rhs, model.lin);
    local.ch = ch.stats;

    // (3) theta update
    FaceField n_face = mobility_on_faces(state.phi, model.mobility_n);
    ScalarField S = model.sources.sample_S(g, state.t);
    ScalarField sigma_old = state.sigma(model.chi);
    ScalarField th_rhs(g);
    th_rhs.data = -model.chi * (ch.phi.data - state.phi.data) / dt -
                  upwind_advect(sigma_old, v).data + S.data;
    ScalarField theta =
        solve_theta_helmholtz(state.theta, n_face, dt, th_rhs, model.lin, &local.theta);

    SimState next;
    next.phi = std::move(ch.phi);
    next.mu = std::move(ch.mu);
    next.theta = std::move(theta);
    next.v = std::move(v);
    next.p = std::move(p);
    next.t = state.t + dt;
    next.step = state.step + 1;

    if (!next.finite())
        throw SolverError("step " + std::to_string(next.step) +
                          ": non-finite field detected, run diverged");
    if (info) *info = local;
    return next;
}

SimState run(const GridSpec& grid, const ModelSpec& model, const InitialData& init, double dt,
             const StartCallback& on_start, const StepCallback& on_step) {
    model.validate();
    if (!(dt > 0.0)) throw ConfigError("run: dt must be positive");

    // Terminal-time admissibility: |u0| + T * sup|U| < 1.
    const double supU = model.sources.sup_norm_U(grid);
    if (std::abs(init.u0) + model.T_end * supU >= 1.0)
        throw ConfigError("run: terminal-time condition violated: |u0| + T*sup|U| = " +
                          std::to_string(std::abs(init.u0) + model.T_end * supU) +
                          " >= 1, so a phase could vanish before T");

    SimState state = make_initial_state(grid, model, init);
    if (on_start) on_start(state);

    const double T = model.T_end;
    while (state.t < T - 1e-12 * std::max(1.0, T)) {
        double dt_k = std::min(dt, T - state.t);
        StepInfo info;
        SimState next = step(state, model, dt_k, &info);
        if (on_step) on_step(state, next, info);
        state = std::move(next);
    }
    return state;
}

}  // namespace chd
