#include "chd/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace chd {

namespace {

// (eps/2) |grad phi|^2 integrated with the face quadrature that matches the
// discrete variational structure.
double gradient_energy(const ScalarField& phi, double eps) {
    FaceField gp = grad_cc_to_face(phi);
    return 0.5 * eps * face_inner(gp, gp);
}

// Cell-averaged |grad phi|^2 from the squared face gradients.
ScalarField grad_sq_cellwise(const ScalarField& phi) {
    const GridSpec& g = phi.grid;
    FaceField gp = grad_cc_to_face(phi);
    ScalarField out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            double s = 0.5 * (gp.xf(i, j) * gp.xf(i, j) + gp.xf(i + 1, j) * gp.xf(i + 1, j));
            if (g.dim == 2)
                s += 0.5 * (gp.yf(i, j) * gp.yf(i, j) + gp.yf(i, j + 1) * gp.yf(i, j + 1));
            out(i, j) = s;
        }
    return out;
}

ScalarField psi_of(const ScalarField& phi, const DoubleWell& well) {
    ScalarField out(phi.grid);
    for (int c = 0; c < phi.grid.num_cells(); ++c) out(c) = well.psi(phi(c));
    return out;
}

ScalarField midpoint(const ScalarField& a, const ScalarField& b) {
    ScalarField out = a;
    out.data = 0.5 * (a.data + b.data);
    return out;
}

}  // namespace

double energy_total(const SimState& state, const ModelSpec& model) {
    const double chi2 = model.chi * model.chi;
    ScalarField psi = psi_of(state.phi, model.potential);
    double bulk = (psi.data / model.eps + 0.5 * state.theta.data.square() -
                   0.5 * chi2 * state.phi.data.square())
                      .sum() *
                  state.phi.grid.cell_volume();
    return bulk + gradient_energy(state.phi, model.eps);
}

std::pair<double, double> gl_density_and_discrepancy(const SimState& state,
                                                     const ModelSpec& model) {
    const GridSpec& g = state.phi.grid;
    ScalarField psi = psi_of(state.phi, model.potential);
    ScalarField gsq = grad_sq_cellwise(state.phi);
    double e_int = 0.0, xi_pos = 0.0;
    for (int c = 0; c < g.num_cells(); ++c) {
        double pe = psi(c) / model.eps;
        double ge = 0.5 * model.eps * gsq(c);
        e_int += pe + ge;
        xi_pos += std::max(ge - pe, 0.0);
    }
    return {e_int * g.cell_volume(), xi_pos * g.cell_volume()};
}

double deformation_energy(const FaceField& v) {
    const GridSpec& g = v.grid;
    double total = 0.0;
    if (g.dim == 1) {
        for (int i = 0; i < g.nx; ++i) {
            double dux = (v.xf(i + 1, 0) - v.xf(i, 0)) / g.hx;
            total += dux * dux;
        }
        return total * g.cell_volume();
    }
    // Diagonal entries at cell centers.
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            double dux = (v.xf(i + 1, j) - v.xf(i, j)) / g.hx;
            double dvy = (v.yf(i, j + 1) - v.yf(i, j)) / g.hy;
            total += dux * dux + dvy * dvy;
        }
    // Shear entry at nodes; ghost reflection encodes the no-slip wall.
    auto u_at = [&](int i, int j) {  // x-velocity, tangential ghost rows
        if (j < 0) return -v.xf(i, 0);
        if (j >= g.ny) return -v.xf(i, g.ny - 1);
        return v.xf(i, j);
    };
    auto w_at = [&](int i, int j) {
        if (i < 0) return -v.yf(0, j);
        if (i >= g.nx) return -v.yf(g.nx - 1, j);
        return v.yf(i, j);
    };
    for (int j = 0; j <= g.ny; ++j)
        for (int i = 0; i <= g.nx; ++i) {
            double duy = (u_at(i, j) - u_at(i, j - 1)) / g.hy;
            double dwx = (w_at(i, j) - w_at(i - 1, j)) / g.hx;
            double d12 = 0.5 * (duy + dwx);
            total += 2.0 * d12 * d12;
        }
    return total * g.cell_volume();
}

double energy_identity_residual(const SimState& prev, const SimState& cur,
                                const ModelSpec& model, double dt) {
    const GridSpec& g = prev.phi.grid;
    const double chi = model.chi;

    double E0 = energy_total(prev, model);
    double E1 = energy_total(cur, model);

    ScalarField phi_m = midpoint(prev.phi, cur.phi);
    ScalarField mu_m = midpoint(prev.mu, cur.mu);
    ScalarField theta_m = midpoint(prev.theta, cur.theta);
    const FaceField& v = cur.v;
    const ScalarField& p = cur.p;

    // Dissipation with mobilities on faces at the midpoint phi.
    ScalarField m_cell(g), n_cell(g);
    for (int c = 0; c < g.num_cells(); ++c) {
        m_cell(c) = model.mob_m(phi_m(c));
        n_cell(c) = model.mob_n(phi_m(c));
    }
    FaceField m_face = face_interp(m_cell);
    FaceField n_face = face_interp(n_cell);
    FaceField gmu = grad_cc_to_face(mu_m);
    FaceField gth = grad_cc_to_face(theta_m);

    double dissipation = 0.0;
    {
        FaceField wmu = gmu, wth = gth;
        wmu.x_faces *= m_face.x_faces;
        wth.x_faces *= n_face.x_faces;
        if (g.dim == 2) {
            wmu.y_faces *= m_face.y_faces;
            wth.y_faces *= n_face.y_faces;
        }
        dissipation = face_inner(wmu, gmu) + face_inner(wth, gth);
    }
    if (model.variant != Variant::ZeroVelocity) {
        dissipation += model.K * face_inner(v, v);
        double eta = model.effective_eta();
        if (eta > 0.0) dissipation += 2.0 * eta * deformation_energy(v);
    }

    const double t_mid = prev.t + 0.5 * dt;
    ScalarField U = model.sources.sample_U(g);
    ScalarField S = model.sources.sample_S(g, t_mid);
    ScalarField H = model.sources.sample_H(g, t_mid);

    Eigen::ArrayXd sigma_m = theta_m.data + chi * phi_m.data;
    double sources = (U.data * phi_m.data * mu_m.data + S.data * theta_m.data +
                      H.data * (p.data - phi_m.data * mu_m.data - 0.5 * sigma_m.square()))
                         .sum() *
                     g.cell_volume();

    return std::abs(E1 - E0 + dt * dissipation - dt * sources);
}

InterfaceProbe extract_interface(const ScalarField& phi) {
    const GridSpec& g = phi.grid;
    InterfaceProbe probe;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i + 1 < g.nx; ++i) {
            double a = phi(i, j), b = phi(i + 1, j);
            if (a == 0.0 && b == 0.0) continue;
            if ((a <= 0.0 && b > 0.0) || (a >= 0.0 && b < 0.0)) {
                double frac = a / (a - b);
                InterfaceProbe::Crossing c;
                c.x = g.xc(i) + frac * g.hx;
                c.y = g.yc(j);
                c.axis = 0;
                c.orient = b > a ? 1 : -1;
                probe.crossings.push_back(c);
            }
        }
    if (g.dim == 2)
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j + 1 < g.ny; ++j) {
                double a = phi(i, j), b = phi(i, j + 1);
                if (a == 0.0 && b == 0.0) continue;
                if ((a <= 0.0 && b > 0.0) || (a >= 0.0 && b < 0.0)) {
                    double frac = a / (a - b);
                    InterfaceProbe::Crossing c;
                    c.x = g.xc(i);
                    c.y = g.yc(j) + frac * g.hy;
                    c.axis = 1;
                    c.orient = b > a ? 1 : -1;
                    probe.crossings.push_back(c);
                }
            }

    // 2D polyline length via marching squares on the cell-center lattice.
    if (g.dim == 2) {
        double len = 0.0;
        for (int j = 0; j + 1 < g.ny; ++j)
            for (int i = 0; i + 1 < g.nx; ++i) {
                double f00 = phi(i, j), f10 = phi(i + 1, j);
                double f01 = phi(i, j + 1), f11 = phi(i + 1, j + 1);
                struct Pt { double x, y; };
                std::vector<Pt> pts;
                auto edge = [&](double fa, double fb, double ax, double ay, double bx,
                                double by) {
                    if ((fa <= 0.0 && fb > 0.0) || (fa >= 0.0 && fb < 0.0)) {
                        if (fa == fb) return;
                        double s = fa / (fa - fb);
                        pts.push_back({ax + s * (bx - ax), ay + s * (by - ay)});
                    }
                };
                double x0 = g.xc(i), x1 = g.xc(i + 1), y0 = g.yc(j), y1 = g.yc(j + 1);
                edge(f00, f10, x0, y0, x1, y0);
                edge(f10, f11, x1, y0, x1, y1);
                edge(f11, f01, x1, y1, x0, y1);
                edge(f01, f00, x0, y1, x0, y0);
                if (pts.size() == 2) {
                    len += std::hypot(pts[0].x - pts[1].x, pts[0].y - pts[1].y);
                } else if (pts.size() == 4) {
                    // saddle: split by the center average
                    double fc = 0.25 * (f00 + f10 + f01 + f11);
                    // pts order follows the edge walk: bottom, right, top, left
                    if (fc > 0.0) {
                        len += std::hypot(pts[0].x - pts[1].x, pts[0].y - pts[1].y);
                        len += std::hypot(pts[2].x - pts[3].x, pts[2].y - pts[3].y);
                    } else {
                        len += std::hypot(pts[0].x - pts[3].x, pts[0].y - pts[3].y);
                        len += std::hypot(pts[1].x - pts[2].x, pts[1].y - pts[2].y);
                    }
                }
            }
        probe.polyline_length = len;
    }
    return probe;
}

double sample_along_axis(const ScalarField& f, double x, double y, int axis) {
    const GridSpec& g = f.grid;
    if (x < 0.0 || x > g.lx || (g.dim == 2 && (y < 0.0 || y > g.ly)))
        throw ProbeError("interface probe left the domain");
    if (axis == 0) {
        int j = g.dim == 2 ? std::clamp(static_cast<int>(y / g.hy), 0, g.ny - 1) : 0;
        double s = x / g.hx - 0.5;
        int i0 = std::clamp(static_cast<int>(std::floor(s)), 0, g.nx - 1);
        int i1 = std::min(i0 + 1, g.nx - 1);
        double frac = std::clamp(s - i0, 0.0, 1.0);
        return (1.0 - frac) * f(i0, j) + frac * f(i1, j);
    }
    int i = std::clamp(static_cast<int>(x / g.hx), 0, g.nx - 1);
    double s = y / g.hy - 0.5;
    int j0 = std::clamp(static_cast<int>(std::floor(s)), 0, g.ny - 1);
    int j1 = std::min(j0 + 1, g.ny - 1);
    double frac = std::clamp(s - j0, 0.0, 1.0);
    return (1.0 - frac) * f(i, j0) + frac * f(i, j1);
}

std::optional<double> measure_jump(const ScalarField& f, const InterfaceProbe& probe) {
    if (probe.crossings.empty()) return std::nullopt;
    if (!(probe.delta > 0.0)) throw ProbeError("probe offset delta must be positive");
    double sum = 0.0;
    for (const auto& c : probe.crossings) {
        double plus, minus;
        if (c.axis == 0) {
            plus = sample_along_axis(f, c.x + probe.delta, c.y, 0);
            minus = sample_along_axis(f, c.x - probe.delta, c.y, 0);
        } else {
            plus = sample_along_axis(f, c.x, c.y + probe.delta, 1);
            minus = sample_along_axis(f, c.x, c.y - probe.delta, 1);
        }
        // +side is where phi > 0
        sum += c.orient > 0 ? plus - minus : minus - plus;
    }
    return sum / static_cast<double>(probe.crossings.size());
}

std::optional<double> measure_sigma_jump(const SimState& state, const ModelSpec& model,
                                         const InterfaceProbe& probe) {
    return measure_jump(state.sigma(model.chi), probe);
}

double default_probe_offset(const ModelSpec& model, const GridSpec& grid) {
    return std::max(3.0 * model.eps, 2.0 * grid.min_h());
}

void uniform_estimate_norms(const SimState& state, const ModelSpec& model, const WTransform& wt,
                            DiagnosticsRecord& rec) {
    const GridSpec& g = state.phi.grid;
    const double vol = g.cell_volume();

    rec.mean_phi = mean(state.phi);
    rec.mean_mu = mean(state.mu);
    rec.mean_theta_sigma = mean(state.theta) + model.chi * rec.mean_phi;
    rec.max_abs_phi = state.phi.data.abs().maxCoeff();

    rec.L2_phi_dev = std::sqrt(((state.phi.data.abs() - 1.0).square()).sum() * vol);
    rec.L2_theta = l2_norm(state.theta);
    rec.L2_p = l2_norm(state.p);
    rec.L2_v = l2_norm(state.v);

    FaceField gmu = grad_cc_to_face(state.mu);
    FaceField gth = grad_cc_to_face(state.theta);
    rec.H1_mu = l2_norm(gmu);
    rec.H1_theta = l2_norm(gth);

    // Total variation of w(phi): evaluate w pointwise, difference across faces.
    ScalarField wfield(g);
    for (int c = 0; c < g.num_cells(); ++c) wfield(c) = wt.w(state.phi(c));
    FaceField gw = grad_cc_to_face(wfield);
    double tv = gw.x_faces.abs().sum();
    if (g.dim == 2) tv += gw.y_faces.abs().sum();
    rec.tv_w = tv * vol;

    ScalarField psi = psi_of(state.phi, model.potential);
    double psi_l1 = psi.data.sum() * vol;
    double grad_e = gradient_energy(state.phi, model.eps);
    rec.G_quantity = psi_l1 / (2.0 * model.eps) + grad_e + rec.L2_theta * rec.L2_theta;

    auto [e_int, xi_pos] = gl_density_and_discrepancy(state, model);
    rec.gl_energy = e_int;
    rec.discrepancy_pos = xi_pos;
    rec.energy_E = energy_total(state, model);
}

DiagnosticsRecord compute_record(const SimState* prev, const SimState& cur,
                                 const ModelSpec& model, const WTransform& wt, double dt,
                                 const StepInfo* info) {
    DiagnosticsRecord rec;
    rec.t = cur.t;
    uniform_estimate_norms(cur, model, wt, rec);
    if (prev) rec.energy_residual = energy_identity_residual(*prev, cur, model, dt);

    InterfaceProbe probe = extract_interface(cur.phi);
    probe.delta = default_probe_offset(model, cur.phi.grid);
    if (!probe.empty()) {
        try {
            if (auto j = measure_sigma_jump(cur, model, probe)) rec.sigma_jump = *j;
        } catch (const ProbeError&) {
            // probes that leave the domain are recorded as missing
        }
    }
    if (info) {
        rec.res_ch = info->ch.residual;
        rec.res_theta = info->theta.residual;
        rec.res_velocity = info->velocity.residual;
    }
    return rec;
}

SnapshotRing::SnapshotRing(const WTransform& wt, int capacity)
    : wt_(&wt), capacity_(std::max(capacity, 4)) {}

void SnapshotRing::offer(double t, const ScalarField& phi) {
    if (counter_++ % stride_ != 0) return;
    Snap s;
    s.t = t;
    s.phi = phi;
    s.w = ScalarField(phi.grid);
    for (int c = 0; c < phi.grid.num_cells(); ++c) s.w(c) = wt_->w(phi(c));
    snaps_.push_back(std::move(s));
    if (static_cast<int>(snaps_.size()) >= capacity_) {
        std::vector<Snap> kept;
        for (std::size_t k = 0; k < snaps_.size(); k += 2) kept.push_back(std::move(snaps_[k]));
        snaps_ = std::move(kept);
        stride_ *= 2;
    }
}

HolderQuotients SnapshotRing::quotients() const {
    HolderQuotients q;
    const std::size_t n = snaps_.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double dt = std::abs(snaps_[j].t - snaps_[i].t);
            if (dt < 1e-14) continue;
            ScalarField dphi = snaps_[i].phi;
            dphi.data -= snaps_[j].phi.data;
            double l2sq = cell_inner(dphi, dphi);
            q.q_phi = std::max(q.q_phi, l2sq / std::pow(dt, 0.25));
            double l1 = (snaps_[i].w.data - snaps_[j].w.data).abs().sum() *
                        snaps_[i].phi.grid.cell_volume();
            q.q_w = std::max(q.q_w, l1 / std::pow(dt, 0.125));
        }
    return q;
}

}  // namespace chd
