#include "chd/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace chd {

namespace {

struct Entry {
    std::string value;
    int line = 0;
    bool used = false;
};

// Tokenized config text: dotted keys to raw values, with duplicate detection.
class KeyTable {
  public:
    explicit KeyTable(const std::string& text) {
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            auto trim = [](std::string s) {
                auto issp = [](unsigned char c) { return std::isspace(c); };
                while (!s.empty() && issp(s.front())) s.erase(s.begin());
                while (!s.empty() && issp(s.back())) s.pop_back();
                return s;
            };
            std::string stripped = trim(line);
            if (stripped.empty()) continue;
            auto eq = stripped.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": expected 'key = value', got '" + stripped + "'");
            std::string key = trim(stripped.substr(0, eq));
            std::string value = trim(stripped.substr(eq + 1));
            if (key.empty())
                throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
            if (entries_.count(key))
                throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" +
                                  key + "' (first set on line " +
                                  std::to_string(entries_[key].line) + ")");
            entries_[key] = Entry{value, lineno, false};
        }
    }

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& def) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return def;
        it->second.used = true;
        return it->second.value;
    }

    std::string require_string(const std::string& key) {
        auto it = entries_.find(key);
        if (it == entries_.end()) throw ConfigError("config: required key '" + key + "' missing");
        it->second.used = true;
        return it->second.value;
    }

    double get_real(const std::string& key, double def) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return def;
        return parse_real(key, *it);
    }

    double require_real(const std::string& key) {
        auto it = entries_.find(key);
        if (it == entries_.end()) throw ConfigError("config: required key '" + key + "' missing");
        return parse_real(key, *it);
    }

    long get_int(const std::string& key, long def) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return def;
        it->second.used = true;
        try {
            std::size_t pos = 0;
            long v = std::stol(it->second.value, &pos);
            if (pos != it->second.value.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            throw ConfigError("config line " + std::to_string(it->second.line) +
                              ": cannot parse '" + it->second.value + "' as an integer for '" +
                              key + "'");
        }
    }

    long require_int(const std::string& key) {
        if (!has(key)) throw ConfigError("config: required key '" + key + "' missing");
        return get_int(key, 0);
    }

    std::vector<double> get_real_list(const std::string& key) {
        auto it = entries_.find(key);
        std::vector<double> out;
        if (it == entries_.end()) return out;
        it->second.used = true;
        std::istringstream ss(it->second.value);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (tok.find_first_not_of(" \t") == std::string::npos) continue;
            try {
                out.push_back(std::stod(tok));
            } catch (...) {
                throw ConfigError("config line " + std::to_string(it->second.line) +
                                  ": cannot parse list entry '" + tok + "' for '" + key + "'");
            }
        }
        return out;
    }

    std::vector<std::string> get_string_list(const std::string& key,
                                             const std::vector<std::string>& def) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return def;
        it->second.used = true;
        std::vector<std::string> out;
        std::istringstream ss(it->second.value);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            while (!tok.empty() && std::isspace((unsigned char)tok.front())) tok.erase(tok.begin());
            while (!tok.empty() && std::isspace((unsigned char)tok.back())) tok.pop_back();
            if (!tok.empty()) out.push_back(tok);
        }
        return out;
    }

    void reject_unknown() const {
        for (const auto& [key, e] : entries_)
            if (!e.used)
                throw ConfigError("config line " + std::to_string(e.line) + ": unknown key '" +
                                  key + "'");
    }

  private:
    double parse_real(const std::string& key, Entry& e) {
        e.used = true;
        try {
            std::size_t pos = 0;
            double v = std::stod(e.value, &pos);
            if (pos != e.value.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            throw ConfigError("config line " + std::to_string(e.line) + ": cannot parse '" +
                              e.value + "' as a real number for '" + key + "'");
        }
    }

    std::map<std::string, Entry> entries_;
};

// amp * cos(pi kx x / lx) * cos(pi ky y / ly): any integer kx, ky >= 1 factor
// integrates to zero over the box, which is what U and H need.
SourceSpec::SpaceTimeFn make_cos_source(double amp, int kx, int ky, double omega, double lx,
                                        double ly, int dim) {
    using std::numbers::pi;
    return [=](double x, double y, double t) {
        double v = amp;
        if (kx > 0) v *= std::cos(pi * kx * x / lx);
        if (dim == 2 && ky > 0) v *= std::cos(pi * ky * y / ly);
        if (omega != 0.0) v *= std::cos(omega * t);
        return v;
    };
}

}  // namespace

const PotentialConstants& default_quartic_constants() {
    static const PotentialConstants consts = [] {
        DoubleWell well = DoubleWell::normalized_quartic();
        WTransform wt(well);
        return discover_constants(well, wt);
    }();
    return consts;
}

RunConfig parse_config_text(const std::string& text) {
    KeyTable keys(text);
    RunConfig cfg;

    // --- grid
    int dim = static_cast<int>(keys.get_int("grid.dim", 1));
    if (dim != 1 && dim != 2) throw ConfigError("config: grid.dim must be 1 or 2");
    int nx = static_cast<int>(keys.require_int("grid.nx"));
    double lx = keys.get_real("grid.lx", 1.0);
    if (dim == 2) {
        int ny = static_cast<int>(keys.get_int("grid.ny", nx));
        double ly = keys.get_real("grid.ly", lx);
        cfg.grid = GridSpec::make_2d(nx, ny, lx, ly);
    } else {
        keys.get_int("grid.ny", 1);  // tolerated but ignored in 1D
        keys.get_real("grid.ly", 1.0);
        cfg.grid = GridSpec::make_1d(nx, lx);
    }

    // --- model
    std::string variant = keys.get_string("model.variant", "zero_velocity");
    if (variant == "darcy") cfg.model.variant = Variant::Darcy;
    else if (variant == "brinkman") cfg.model.variant = Variant::Brinkman;
    else if (variant == "brinkman_scaled") cfg.model.variant = Variant::BrinkmanScaled;
    else if (variant == "zero_velocity") cfg.model.variant = Variant::ZeroVelocity;
    else
        throw ConfigError("config: model.variant must be one of darcy, brinkman, "
                          "brinkman_scaled, zero_velocity (got '" + variant + "')");

    cfg.model.eps = keys.require_real("model.eps");
    cfg.model.chi = keys.get_real("model.chi", 0.0);
    cfg.model.K = keys.get_real("model.K", 1.0);
    cfg.model.eta = keys.get_real("model.eta", 0.1);
    cfg.model.beta = keys.get_real("model.beta", 1.0);
    cfg.model.T_end = keys.require_real("model.T");
    double mob_m = keys.get_real("model.mobility_m", 1.0);
    double mob_n = keys.get_real("model.mobility_n", 1.0);
    cfg.model.mobility_m = [mob_m](double) { return mob_m; };
    cfg.model.mobility_n = [mob_n](double) { return mob_n; };

    // --- initial data
    std::string kind = keys.get_string("init.kind", "tanh_strip");
    if (kind == "tanh_strip") cfg.init.kind = InitialData::Kind::TanhStrip;
    else if (kind == "tanh_circle") cfg.init.kind = InitialData::Kind::TanhCircle;
    else if (kind == "random") cfg.init.kind = InitialData::Kind::RandomPerturbation;
    else
        throw ConfigError("config: init.kind must be tanh_strip, tanh_circle or random (got '" +
                          kind + "')");
    cfg.init.center_x = keys.get_real("init.center_x", 0.5 * cfg.grid.lx);
    cfg.init.center_y = keys.get_real("init.center_y", 0.5 * cfg.grid.ly);
    cfg.init.normal_x = keys.get_real("init.normal_x", 1.0);
    cfg.init.normal_y = keys.get_real("init.normal_y", 0.0);
    cfg.init.radius = keys.get_real("init.radius", 0.25 * cfg.grid.lx);
    cfg.init.amplitude = keys.get_real("init.amplitude", 0.05);
    if (keys.has("init.seed")) {
        cfg.init.seed = static_cast<std::uint64_t>(keys.require_int("init.seed"));
        cfg.init.seed_set = true;
    }
    if (cfg.init.kind == InitialData::Kind::RandomPerturbation && !cfg.init.seed_set)
        throw ConfigError("config: init.kind = random requires an explicit init.seed "
                          "(all randomness sits behind the seed)");
    cfg.init.u0 = keys.get_real("init.u0", 0.0);
    cfg.init.theta0 = keys.get_real("init.theta0", 0.0);

    // --- sources
    auto read_source = [&](const std::string& prefix, bool allow_time) -> SourceSpec::SpaceTimeFn {
        std::string skind = keys.get_string(prefix + ".kind", "zero");
        double amp = keys.get_real(prefix + ".amplitude", 1.0);
        int kx = static_cast<int>(keys.get_int(prefix + ".kx", 1));
        int ky = static_cast<int>(keys.get_int(prefix + ".ky", 0));
        double omega = allow_time ? keys.get_real(prefix + ".omega", 0.0) : 0.0;
        if (skind == "zero") return nullptr;
        if (skind == "cos")
            return make_cos_source(amp, kx, ky, omega, cfg.grid.lx, cfg.grid.ly, cfg.grid.dim);
        throw ConfigError("config: " + prefix + ".kind must be zero or cos (got '" + skind +
                          "')");
    };

    if (auto u = read_source("source.U", /*allow_time=*/false)) {
        int kx = static_cast<int>(keys.get_int("source.U.kx", 1));
        int ky = static_cast<int>(keys.get_int("source.U.ky", 0));
        if (kx <= 0 && !(cfg.grid.dim == 2 && ky > 0))
            throw ConfigError("config: source.U needs kx >= 1 (or ky >= 1 in 2D) so that its "
                              "spatial mean vanishes");
        cfg.model.sources.U = [u](double x, double y) { return u(x, y, 0.0); };
    }
    cfg.model.sources.S = read_source("source.S", /*allow_time=*/true);
    if (auto h = read_source("source.H", /*allow_time=*/true)) {
        int kx = static_cast<int>(keys.get_int("source.H.kx", 1));
        int ky = static_cast<int>(keys.get_int("source.H.ky", 0));
        if (kx <= 0 && !(cfg.grid.dim == 2 && ky > 0))
            throw ConfigError("config: source.H needs kx >= 1 (or ky >= 1 in 2D) so that its "
                              "spatial mean vanishes");
        cfg.model.sources.H = h;
    }

    // --- solver
    cfg.dt = keys.require_real("solver.dt");
    if (!(cfg.dt > 0.0)) throw ConfigError("config: solver.dt must be positive");
    cfg.model.S0 = keys.get_real("solver.S0", 4.0);
    cfg.model.lin.rel_tol = keys.get_real("solver.rel_tol", 1e-9);
    cfg.model.lin.abs_tol = keys.get_real("solver.abs_tol", 1e-12);
    cfg.model.lin.max_iter = static_cast<int>(keys.get_int("solver.max_iter", 0));

    // --- output
    cfg.csv_path = keys.get_string("output.csv", "out.csv");
    cfg.snapshot_dir = keys.get_string("output.snapshot_dir", "");
    cfg.snapshot_times = keys.get_real_list("output.snapshot_times");
    cfg.snapshot_fields = keys.get_string_list("output.snapshot_fields", {"phi"});
    for (const auto& f : cfg.snapshot_fields)
        if (f != "phi" && f != "mu" && f != "theta" && f != "p")
            throw ConfigError("config: output.snapshot_fields entries must be phi, mu, theta "
                              "or p (got '" + f + "')");
    cfg.diag_interval = static_cast<int>(keys.get_int("output.diag_interval", 10));
    if (cfg.diag_interval < 1) throw ConfigError("config: output.diag_interval must be >= 1");

    // --- sweep block
    cfg.sweep.eps_list = keys.get_real_list("sweep.eps_list");
    cfg.sweep.cells_per_eps = keys.get_real("sweep.cells_per_eps", 8.0);
    cfg.sweep.mode = keys.get_string("sweep.mode", "scaling");
    if (cfg.sweep.mode != "scaling" && cfg.sweep.mode != "brinkman_vs_darcy")
        throw ConfigError("config: sweep.mode must be scaling or brinkman_vs_darcy");
    cfg.sweep.metrics = keys.get_string_list("sweep.metrics", {"L2_phi_dev"});
    for (const auto& m : cfg.sweep.metrics) record_metric(DiagnosticsRecord{}, m);
    cfg.sweep.dt_base = keys.get_real("sweep.dt_base", 0.0);
    cfg.sweep.dt_power = keys.get_real("sweep.dt_power", 1.0);
    cfg.sweep.beta = keys.get_real("sweep.beta", 1.0);
    cfg.sweep.eta_fixed = keys.get_real("sweep.eta_fixed", -1.0);
    cfg.sweep.summary_csv = keys.get_string("sweep.summary_csv", "sweep_summary.csv");

    cfg.jobs = static_cast<int>(keys.get_int("run.jobs", 0));
    if (cfg.jobs < 0) throw ConfigError("config: run.jobs must be >= 0");

    keys.reject_unknown();

    // --- admissibility gates
    cfg.model.validate();
    if (!(cfg.init.u0 > -1.0 && cfg.init.u0 < 1.0))
        throw ConfigError("config: init.u0 must lie strictly inside (-1, 1)");

    const double supU = cfg.model.sources.sup_norm_U(cfg.grid);
    const double budget = std::abs(cfg.init.u0) + cfg.model.T_end * supU;
    if (budget >= 1.0)
        throw ConfigError(
            "config: terminal-time condition violated: |u0| + T*sup|U| = " +
            std::to_string(budget) +
            " >= 1; over [0,T] the mean of phi could reach +-1 and a phase would vanish. "
            "Reduce model.T, init.u0 or the U amplitude.");

    double eps0 = 1.0;
    if (cfg.model.chi > 0.0) {
        const PotentialConstants& pc = default_quartic_constants();
        eps0 = std::min(1.0, pc.k0 / (cfg.model.chi * cfg.model.chi));
    }
    auto check_eps0 = [eps0](double e) {
        if (e > eps0)
            throw ConfigError("config: eps = " + std::to_string(e) +
                              " exceeds the admissible ceiling eps0 = min(1, k0/chi^2) = " +
                              std::to_string(eps0));
    };
    check_eps0(cfg.model.eps);
    for (double e : cfg.sweep.eps_list) check_eps0(e);

    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

SweepPlan RunConfig::make_sweep_plan() const {
    SweepPlan plan;
    plan.eps_list = sweep.eps_list;
    plan.cells_per_eps = sweep.cells_per_eps;
    plan.dim = grid.dim;
    plan.lx = grid.lx;
    plan.ly = grid.ly;
    plan.base_model = model;
    plan.init = init;
    plan.T_end = model.T_end;
    plan.dt_base = sweep.dt_base > 0.0 ? sweep.dt_base : dt;
    plan.dt_power = sweep.dt_power;
    plan.diag_interval = diag_interval;
    plan.metrics = sweep.metrics;
    plan.eps0_guard = 1.0;
    if (model.chi > 0.0) {
        const PotentialConstants& pc = default_quartic_constants();
        plan.eps0_guard = std::min(1.0, pc.k0 / (model.chi * model.chi));
    }
    return plan;
}

std::string default_config_text() {
    return R"(# chd run configuration (defaults shown; keys marked REQUIRED have none)
# Lines are `key = value`; '#' starts a comment; unknown keys are rejected.

grid.dim = 1                 # 1 or 2
grid.nx = 256                # REQUIRED: cells in x
grid.ny = 256                # 2D only (defaults to grid.nx)
grid.lx = 1.0
grid.ly = 1.0                # 2D only (defaults to grid.lx)

model.variant = zero_velocity   # darcy | brinkman | brinkman_scaled | zero_velocity
model.eps = 0.02             # REQUIRED: interface width parameter
model.chi = 0.0              # cross-diffusion strength
model.K = 1.0                # inverse permeability
model.eta = 0.1              # brinkman viscosity
model.beta = 1.0             # brinkman_scaled: eta = eps^beta
model.T = 0.05               # REQUIRED: end time
model.mobility_m = 1.0       # constant phase mobility
model.mobility_n = 1.0       # constant chemical mobility

init.kind = tanh_strip       # tanh_strip | tanh_circle | random
init.center_x = 0.5          # default lx/2
init.center_y = 0.5          # default ly/2
init.normal_x = 1.0
init.normal_y = 0.0
init.radius = 0.25           # tanh_circle (default lx/4)
init.amplitude = 0.05        # random perturbation size
init.seed = 1                # REQUIRED when init.kind = random
init.u0 = 0.0                # target mean of phi, in (-1, 1)
init.theta0 = 0.0            # constant initial theta

source.U.kind = zero         # zero | cos  (zero-mean phase source factor)
source.U.amplitude = 1.0
source.U.kx = 1              # cos(pi kx x / lx); kx >= 1 keeps the mean zero
source.U.ky = 0
source.S.kind = zero         # chemical source
source.S.amplitude = 1.0
source.S.kx = 1
source.S.ky = 0
source.S.omega = 0.0         # multiplies by cos(omega t)
source.H.kind = zero         # velocity divergence (darcy variant only)
source.H.amplitude = 1.0
source.H.kx = 1
source.H.ky = 0
source.H.omega = 0.0

solver.dt = 1e-4             # REQUIRED: time step
solver.S0 = 4.0              # stabilization constant of the IMEX step
solver.rel_tol = 1e-9
solver.abs_tol = 1e-12
solver.max_iter = 0          # 0 means 10 * number of unknowns

output.csv = out.csv
output.snapshot_dir =        # empty disables snapshots
output.snapshot_times =      # comma list of times
output.snapshot_fields = phi # comma list: phi, mu, theta, p
output.diag_interval = 10    # steps between diagnostics rows

sweep.eps_list =             # REQUIRED for `sweep`: decreasing comma list
sweep.cells_per_eps = 8
sweep.mode = scaling         # scaling | brinkman_vs_darcy
sweep.metrics = L2_phi_dev   # record fields to fit
sweep.dt_base = 0            # dt at the largest eps (0 means solver.dt)
sweep.dt_power = 1.0         # dt(eps) = dt_base * (eps/eps_max)^power
sweep.beta = 1.0             # brinkman_vs_darcy: eta = eps^beta
sweep.eta_fixed = -1         # >= 0 pins eta (control experiment)
sweep.summary_csv = sweep_summary.csv

run.jobs = 0                 # parallel sweep runs; 0 = hardware, env CHD_JOBS overrides
)";
}

}  // namespace chd
