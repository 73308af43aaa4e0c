// Batch front end.
//
//   chd simulate <config>   run one simulation, write diagnostics CSV + snapshots
//   chd sweep <config>      run the eps sweep described by the config
//   chd check               verify the potential / transform property suite
//   chd --print-defaults    print the documented default configuration
//
// Exit codes: 0 success, 2 config error, 3 solver divergence, 4 partial sweep
// failure, 5 I/O error.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <thread>

#include "chd/config.hpp"
#include "chd/io.hpp"
#include "chd/rng.hpp"

namespace {

using namespace chd;

int resolve_jobs(const RunConfig& cfg) {
    if (const char* env = std::getenv("CHD_JOBS")) {
        try {
            int j = std::stoi(env);
            if (j >= 1) return j;
        } catch (...) {
        }
        std::cerr << "warning: ignoring unparseable CHD_JOBS='" << env << "'\n";
    }
    if (cfg.jobs >= 1) return cfg.jobs;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

std::string snapshot_path(const RunConfig& cfg, const std::string& field, int index) {
    return cfg.snapshot_dir + "/" + field + "_" + std::to_string(index) + ".snap";
}

void write_snapshots(const RunConfig& cfg, const SimState& st, int index) {
    for (const auto& f : cfg.snapshot_fields) {
        const ScalarField* field = nullptr;
        if (f == "phi") field = &st.phi;
        else if (f == "mu") field = &st.mu;
        else if (f == "theta") field = &st.theta;
        else if (f == "p") field = &st.p;
        if (field) write_snapshot(snapshot_path(cfg, f, index), *field, f, st.t);
    }
}

int cmd_simulate(const std::string& config_path) {
    RunConfig cfg = parse_config_file(config_path);
    WTransform wt(cfg.model.potential);
    CsvWriter csv(cfg.csv_path);

    const bool snapshots = !cfg.snapshot_dir.empty() && !cfg.snapshot_times.empty();
    if (snapshots) std::filesystem::create_directories(cfg.snapshot_dir);
    std::vector<double> snap_times = cfg.snapshot_times;
    std::sort(snap_times.begin(), snap_times.end());
    std::size_t next_snap = 0;
    int snap_index = 0;

    auto maybe_snapshot = [&](const SimState& st) {
        while (snapshots && next_snap < snap_times.size() &&
               st.t >= snap_times[next_snap] - 1e-12) {
            write_snapshots(cfg, st, snap_index++);
            ++next_snap;
        }
    };

    auto on_start = [&](const SimState& st) {
        csv.write_record(compute_record(nullptr, st, cfg.model, wt, cfg.dt));
        maybe_snapshot(st);
    };
    auto on_step = [&](const SimState& prev, const SimState& cur, const StepInfo& info) {
        if (cur.step % cfg.diag_interval == 0 ||
            cur.t >= cfg.model.T_end - 1e-12 * std::max(1.0, cfg.model.T_end))
            csv.write_record(
                compute_record(&prev, cur, cfg.model, wt, cur.t - prev.t, &info));
        maybe_snapshot(cur);
    };

    SimState final_state = run(cfg.grid, cfg.model, cfg.init, cfg.dt, on_start, on_step);
    std::cout << "simulate: finished at t = " << format_g17(final_state.t) << " after "
              << final_state.step << " steps; diagnostics in " << cfg.csv_path << "\n";
    return 0;
}

int cmd_sweep(const std::string& config_path) {
    RunConfig cfg = parse_config_file(config_path);
    if (cfg.sweep.eps_list.empty())
        throw ConfigError("sweep: sweep.eps_list is required for the sweep command");
    SweepPlan plan = cfg.make_sweep_plan();
    const int jobs = resolve_jobs(cfg);

    std::ofstream out(cfg.sweep.summary_csv, std::ios::binary);
    if (!out) throw IoError("cannot open sweep summary file: " + cfg.sweep.summary_csv);

    if (cfg.sweep.mode == "brinkman_vs_darcy") {
        auto rows = compare_brinkman_darcy(plan, cfg.sweep.beta, cfg.sweep.eta_fixed, jobs);
        out << "# chd-sharp v1\n";
        out << "eps,eta,vdiff_L2Q,vdiff_final\n";
        int failed = 0;
        for (const auto& r : rows) {
            if (!r.ok) {
                ++failed;
                std::cerr << "sweep: eps = " << r.eps << " failed: " << r.error << "\n";
                continue;
            }
            out << format_g17(r.eps) << ',' << format_g17(r.eta) << ','
                << format_g17(r.vdiff_L2Q) << ',' << format_g17(r.vdiff_final) << "\n";
        }
        std::cout << "sweep: brinkman-vs-darcy table in " << cfg.sweep.summary_csv << "\n";
        if (failed == static_cast<int>(rows.size())) return 3;
        return failed > 0 ? 4 : 0;
    }

    SweepReport report = run_sweep(plan, jobs);
    out << "# chd-sharp v1\n";
    out << "eps";
    for (const auto& m : plan.metrics) out << ',' << m;
    out << ",holder_q_phi,holder_q_w,max_abs_phi_run\n";
    for (const auto& r : report.results) {
        if (!r.ok) {
            std::cerr << "sweep: eps = " << r.eps << " failed: " << r.error << "\n";
            continue;
        }
        out << format_g17(r.eps);
        for (const auto& m : plan.metrics) out << ',' << format_g17(record_metric(r.final_record, m));
        out << ',' << format_g17(r.holder.q_phi) << ',' << format_g17(r.holder.q_w) << ','
            << format_g17(r.max_abs_phi_run) << "\n";
    }
    for (const auto& [metric, fit] : report.fits) {
        out << "# fit " << metric << " slope=" << format_g17(fit.slope)
            << " intercept=" << format_g17(fit.intercept)
            << " residual=" << format_g17(fit.residual) << "\n";
        const auto& orders = report.pairwise_orders.at(metric);
        out << "# observed orders " << metric << " =";
        for (double o : orders) out << ' ' << format_g17(o);
        out << "\n";
    }
    std::cout << "sweep: summary in " << cfg.sweep.summary_csv << "\n";
    if (!report.any_ok) return 3;
    return report.all_ok ? 0 : 4;
}

int cmd_check() {
    DoubleWell well = DoubleWell::normalized_quartic();
    WTransform wt(well);

    struct Row {
        std::string name;
        bool pass;
        std::string detail;
    };
    std::vector<Row> rows;
    auto add = [&rows](const std::string& name, bool pass, const std::string& detail) {
        rows.push_back({name, pass, detail});
    };

    double nerr = normalization_error(well);
    add("well normalization  int sqrt(2 psi) = 1", nerr <= 1e-8,
        "error = " + format_g17(nerr));
    add("psi(+-1) = 0", well.psi(1.0) == 0.0 && well.psi(-1.0) == 0.0, "");
    add("psi'(+-1) = 0", well.dpsi(1.0) == 0.0 && well.dpsi(-1.0) == 0.0, "");
    {
        bool ok = true;
        for (double y = -1.0; y <= 1.0 + 1e-12; y += 1e-3)
            ok = ok && well.psi(y) <= 1.0 + y * y + 1e-12;
        add("psi <= 1 + y^2 on [-1, 1]", ok, "");
    }
    {
        bool ok = true;
        SplitMix64 rng(42);
        for (int k = 0; k < 10000; ++k) {
            double y1 = -5.0 + 10.0 * rng.next_double();
            double y2 = -5.0 + 10.0 * rng.next_double();
            if (y1 == y2) continue;
            if ((y1 < y2) != (wt.w(y1) < wt.w(y2))) ok = false;
        }
        add("w strictly increasing (10^4 random pairs)", ok, "");
        double rt = wt.w_inv(wt.w(0.3));
        add("w_inv(w(0.3)) round trip", std::abs(rt - 0.3) <= 1e-9,
            "error = " + format_g17(std::abs(rt - 0.3)));
    }

    bool constants_ok = true;
    PotentialConstants pc;
    try {
        pc = discover_constants(well, wt);
    } catch (const std::exception& e) {
        constants_ok = false;
        add("constant discovery + fine-grid verification", false, e.what());
    }
    if (constants_ok) {
        add("constant discovery + fine-grid verification", true,
            "C0=" + format_g17(pc.C0) + " C1=" + format_g17(pc.C1) + " c0=" + format_g17(pc.c0) +
                " k0=" + format_g17(pc.k0) + " k1=" + format_g17(pc.k1) +
                " q=" + format_g17(well.growth_exponent()));
        add("C1 > 0", pc.C1 > 0.0, "");
    }

    {
        ModelSpec m;
        m.eps = 0.1;
        m.T_end = 0.0;
        bool ok = true;
        std::string detail;
        try {
            m.validate();
        } catch (const std::exception& e) {
            ok = false;
            detail = e.what();
        }
        add("mobility bounds on [-2, 2] (defaults)", ok, detail);
    }

    bool all = true;
    for (const auto& r : rows) {
        all = all && r.pass;
        std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.name;
        if (!r.detail.empty()) std::cout << "  [" << r.detail << "]";
        std::cout << "\n";
    }
    std::cout << (all ? "check: all properties hold\n" : "check: FAILURES present\n");
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        if (args.empty() || args[0] == "--help" || args[0] == "-h") {
            std::cout << "usage: chd simulate <config> | chd sweep <config> | chd check | "
                         "chd --print-defaults\n";
            return args.empty() ? 2 : 0;
        }
        if (args[0] == "--print-defaults") {
            std::cout << default_config_text();
            return 0;
        }
        if (args[0] == "check") return cmd_check();
        if (args[0] == "simulate" || args[0] == "sweep") {
            if (args.size() < 2) {
                std::cerr << "error: config: missing <config> argument for '" << args[0] << "'\n";
                return 2;
            }
            return args[0] == "simulate" ? cmd_simulate(args[1]) : cmd_sweep(args[1]);
        }
        std::cerr << "error: config: unknown command '" << args[0] << "'\n";
        return 2;
    } catch (const chd::ConfigError& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return 2;
    } catch (const chd::SolverError& e) {
        std::cerr << "error: solver: " << e.what() << "\n";
        return 3;
    } catch (const chd::IoError& e) {
        std::cerr << "error: io: " << e.what() << "\n";
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 1;
    }
}
