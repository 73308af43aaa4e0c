#include "chd/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <future>

namespace chd {

double SweepPlan::dt_for(double eps) const {
    return dt_base * std::pow(eps / eps_list.front(), dt_power);
}

int SweepPlan::nx_for(double eps) const {
    return static_cast<int>(std::ceil(cells_per_eps * lx / eps));
}

void SweepPlan::validate() const {
    if (eps_list.empty()) throw ConfigError("sweep: eps_list must not be empty");
    for (std::size_t k = 0; k + 1 < eps_list.size(); ++k)
        if (!(eps_list[k] > eps_list[k + 1]))
            throw ConfigError("sweep: eps_list must be strictly decreasing");
    for (double e : eps_list) {
        if (!(e > 0.0)) throw ConfigError("sweep: eps must be positive");
        if (e > eps0_guard)
            throw ConfigError("sweep: eps = " + std::to_string(e) +
                              " exceeds the admissible eps0 = " + std::to_string(eps0_guard) +
                              " (eps0 = min(1, k0/chi^2))");
    }
    if (cells_per_eps < 6.0)
        throw ConfigError("sweep: need at least 6 cells per interface width");
    if (!(dt_base > 0.0)) throw ConfigError("sweep: dt_base must be positive");
    if (!(T_end > 0.0)) throw ConfigError("sweep: T must be positive");
}

double record_metric(const DiagnosticsRecord& rec, const std::string& name) {
    if (name == "L2_phi_dev") return rec.L2_phi_dev;
    if (name == "gl_energy") return rec.gl_energy;
    if (name == "discrepancy_pos") return rec.discrepancy_pos;
    if (name == "G_quantity") return rec.G_quantity;
    if (name == "tv_w") return rec.tv_w;
    if (name == "L2_theta") return rec.L2_theta;
    if (name == "L2_v") return rec.L2_v;
    if (name == "L2_p") return rec.L2_p;
    if (name == "H1_mu") return rec.H1_mu;
    if (name == "H1_theta") return rec.H1_theta;
    if (name == "energy_E") return rec.energy_E;
    if (name == "max_abs_phi") return rec.max_abs_phi;
    if (name == "sigma_jump") return rec.sigma_jump;
    if (name == "mean_phi") return rec.mean_phi;
    if (name == "mean_mu") return rec.mean_mu;
    throw ConfigError("sweep: unknown metric '" + name + "'");
}

double SweepReport::metric_value(const EpsRunResult& r, const std::string& name) const {
    return record_metric(r.final_record, name);
}

PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.size() < 3)
        throw ConfigError("fit_power_law: need at least 3 (eps, value) pairs");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(pairs.size());
    for (auto& [e, v] : pairs) {
        if (!(e > 0.0) || !(v > 0.0))
            throw ConfigError("fit_power_law: all eps and values must be positive");
        double x = std::log(e), y = std::log(v);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    PowerLawFit fit;
    const double denom = n * sxx - sx * sx;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss = 0.0;
    for (auto& [e, v] : pairs) {
        double r = std::log(v) - (fit.intercept + fit.slope * std::log(e));
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

namespace {

struct PerEpsSetup {
    GridSpec grid;
    ModelSpec model;
    double dt;
};

PerEpsSetup setup_for(const SweepPlan& plan, double eps) {
    PerEpsSetup s;
    int nx = plan.nx_for(eps);
    s.grid = plan.dim == 2 ? GridSpec::make_2d(nx, nx, plan.lx, plan.ly)
                           : GridSpec::make_1d(nx, plan.lx);
    s.model = plan.base_model;
    s.model.eps = eps;
    s.model.T_end = plan.T_end;
    s.dt = plan.dt_for(eps);
    return s;
}

EpsRunResult run_one(const SweepPlan& plan, double eps) {
    EpsRunResult out;
    out.eps = eps;
    try {
        PerEpsSetup s = setup_for(plan, eps);
        WTransform wt(s.model.potential);
        SnapshotRing ring(wt);
        double max_abs = 0.0;
        StepInfo last_info;

        auto on_start = [&](const SimState& st) {
            ring.offer(st.t, st.phi);
            max_abs = std::max(max_abs, st.phi.data.abs().maxCoeff());
        };
        auto on_step = [&](const SimState& prev, const SimState& cur, const StepInfo& info) {
            (void)prev;
            last_info = info;
            if (cur.step % plan.diag_interval == 0) ring.offer(cur.t, cur.phi);
            max_abs = std::max(max_abs, cur.phi.data.abs().maxCoeff());
        };
        SimState final_state = run(s.grid, s.model, plan.init, s.dt, on_start, on_step);
        ring.offer(final_state.t, final_state.phi);
        out.final_record = compute_record(nullptr, final_state, s.model, wt, s.dt, &last_info);
        out.holder = ring.quotients();
        out.max_abs_phi_run = std::max(max_abs, out.final_record.max_abs_phi);
        out.ok = true;
    } catch (const std::exception& e) {
        out.ok = false;
        out.error = e.what();
    }
    return out;
}

}  // namespace

SweepReport run_sweep(const SweepPlan& plan, int jobs) {
    plan.validate();
    SweepReport report;
    report.results.resize(plan.eps_list.size());

    const int n = static_cast<int>(plan.eps_list.size());
    jobs = std::max(1, std::min(jobs, n));
    if (jobs == 1) {
        for (int k = 0; k < n; ++k) report.results[k] = run_one(plan, plan.eps_list[k]);
    } else {
        std::vector<std::future<EpsRunResult>> futs(n);
        for (int k = 0; k < n; ++k)
            futs[k] = std::async(std::launch::async,
                                 [&plan, k] { return run_one(plan, plan.eps_list[k]); });
        for (int k = 0; k < n; ++k) report.results[k] = futs[k].get();
    }

    report.all_ok = std::all_of(report.results.begin(), report.results.end(),
                                [](const EpsRunResult& r) { return r.ok; });
    report.any_ok = std::any_of(report.results.begin(), report.results.end(),
                                [](const EpsRunResult& r) { return r.ok; });

    for (const std::string& metric : plan.metrics) {
        std::vector<std::pair<double, double>> pairs;
        for (const auto& r : report.results)
            if (r.ok) {
                double v = record_metric(r.final_record, metric);
                if (v > 0.0 && std::isfinite(v)) pairs.emplace_back(r.eps, v);
            }
        // pairwise observed orders for eps halving (or any ratio)
        std::vector<double> orders;
        for (std::size_t k = 0; k + 1 < pairs.size(); ++k) {
            double num = std::log(pairs[k].second / pairs[k + 1].second);
            double den = std::log(pairs[k].first / pairs[k + 1].first);
            orders.push_back(num / den);
        }
        report.pairwise_orders[metric] = std::move(orders);
        if (pairs.size() >= 3) report.fits[metric] = fit_power_law(pairs);
    }
    return report;
}

std::vector<BrinkmanDarcyRow> compare_brinkman_darcy(const SweepPlan& plan, double beta,
                                                     double eta_fixed, int jobs) {
    plan.validate();
    if (eta_fixed < 0.0 && !(beta > 0.0))
        throw ConfigError("compare_brinkman_darcy: beta must be positive");
    if (plan.base_model.sources.has_H())
        throw ConfigError("compare_brinkman_darcy: H must vanish (solenoidal comparison)");

    auto run_pair = [&plan, beta, eta_fixed](double eps) {
        BrinkmanDarcyRow row;
        row.eps = eps;
        try {
            PerEpsSetup sd = setup_for(plan, eps);
            sd.model.variant = Variant::Darcy;

            PerEpsSetup sb = setup_for(plan, eps);
            if (eta_fixed >= 0.0) {
                sb.model.variant = Variant::Brinkman;
                sb.model.eta = eta_fixed;
            } else {
                sb.model.variant = Variant::BrinkmanScaled;
                sb.model.beta = beta;
            }
            row.eta = sb.model.effective_eta();

            sd.model.validate();
            sb.model.validate();
            SimState darcy = make_initial_state(sd.grid, sd.model, plan.init);
            SimState brink = make_initial_state(sb.grid, sb.model, plan.init);

            double acc = 0.0;
            double final_diff = 0.0;
            auto vdiff = [](const FaceField& a, const FaceField& b) {
                FaceField d = a;
                d.x_faces -= b.x_faces;
                if (d.grid.dim == 2) d.y_faces -= b.y_faces;
                return face_inner(d, d);
            };
            // the stored velocities of the initial states
            final_diff = vdiff(brink.v, darcy.v);

            double t = 0.0;
            const double T = plan.T_end;
            while (t < T - 1e-12 * std::max(1.0, T)) {
                double dt_k = std::min(sd.dt, T - t);
                darcy = step(darcy, sd.model, dt_k);
                brink = step(brink, sb.model, dt_k);
                final_diff = vdiff(brink.v, darcy.v);
                acc += dt_k * final_diff;
                t += dt_k;
            }
            row.vdiff_L2Q = std::sqrt(acc);
            row.vdiff_final = std::sqrt(final_diff);
            row.ok = true;
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
        return row;
    };

    const int n = static_cast<int>(plan.eps_list.size());
    std::vector<BrinkmanDarcyRow> rows(n);
    jobs = std::max(1, std::min(jobs, n));
    if (jobs == 1) {
        for (int k = 0; k < n; ++k) rows[k] = run_pair(plan.eps_list[k]);
    } else {
        std::vector<std::future<BrinkmanDarcyRow>> futs(n);
        for (int k = 0; k < n; ++k)
            futs[k] = std::async(std::launch::async,
                                 [&run_pair, &plan, k] { return run_pair(plan.eps_list[k]); });
        for (int k = 0; k < n; ++k) rows[k] = futs[k].get();
    }
    return rows;
}

}  // namespace chd
