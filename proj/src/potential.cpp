#include "chd/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "chd/rng.hpp"

namespace chd {

namespace {

double simpson(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_step(const std::function<double(double)>& f, double a, double fa, double b,
                     double fb, double m, double fm, double whole, double tol, int depth) {
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = simpson(a, fa, m, fm, flm);
    double right = simpson(m, fm, b, fb, frm);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_quadrature(const std::function<double(double)>& f, double a, double b,
                           double abs_tol) {
    if (a == b) return 0.0;
    double sign = 1.0;
    if (b < a) {
        std::swap(a, b);
        sign = -1.0;
    }
    double fa = f(a), fb = f(b), m = 0.5 * (a + b), fm = f(m);
    double whole = simpson(a, fa, b, fb, fm);
    return sign * adaptive_step(f, a, fa, b, fb, m, fm, whole, abs_tol, 48);
}

DoubleWell::DoubleWell(Fn psi, Fn dpsi, Fn ddpsi, double growth_exponent)
    : psi_(std::move(psi)), dpsi_(std::move(dpsi)), ddpsi_(std::move(ddpsi)),
      q_(growth_exponent) {
    if (!psi_ || !dpsi_ || !ddpsi_) throw ConfigError("DoubleWell: all derivatives required");
    if (!(q_ > 2.0)) throw ConfigError("DoubleWell: growth exponent must exceed 2");
}

DoubleWell DoubleWell::normalized_quartic() {
    return DoubleWell(
        [](double y) { double u = 1.0 - y * y; return (9.0 / 32.0) * u * u; },
        [](double y) { return (9.0 / 8.0) * (y * y * y - y); },
        [](double y) { return (9.0 / 8.0) * (3.0 * y * y - 1.0); }, 4.0);
}

double DoubleWell::psi_tilde(double y) const {
    return std::min(psi_(y), 1.0 + y * y);
}

double WTransform::integrand(double s) const {
    return std::sqrt(2.0 * std::max(0.0, well_.psi_tilde(s)));
}

double WTransform::segment(double a, double b, double tol) const {
    return adaptive_quadrature([this](double s) { return integrand(s); }, a, b, tol);
}

WTransform::WTransform(const DoubleWell& well)
    : well_(well), table_lo_(-6.0), table_step_(1e-3) {
    const int n = static_cast<int>(std::lround(12.0 / table_step_)) + 1;
    table_.resize(n);
    // Cumulative sums from the table start, then re-anchor so w(-1) = 0.
    table_[0] = 0.0;
    for (int k = 1; k < n; ++k) {
        double a = table_lo_ + (k - 1) * table_step_;
        table_[k] = table_[k - 1] + segment(a, a + table_step_, 1e-14);
    }
    const int k_anchor = static_cast<int>(std::lround((-1.0 - table_lo_) / table_step_));
    const double shift = table_[k_anchor];
    for (double& v : table_) v -= shift;
}

double WTransform::w(double y) const {
    if (!std::isfinite(y)) throw ConfigError("WTransform::w: non-finite argument");
    const double hi = table_lo_ + (table_.size() - 1) * table_step_;
    if (y < table_lo_) return table_.front() + segment(table_lo_, y, 1e-12);
    if (y > hi) return table_.back() + segment(hi, y, 1e-12);
    int k = static_cast<int>(std::floor((y - table_lo_) / table_step_));
    k = std::clamp(k, 0, static_cast<int>(table_.size()) - 1);
    double yk = table_lo_ + k * table_step_;
    return table_[k] + segment(yk, y, 1e-13);
}

double WTransform::w_inv(double z) const {
    if (!std::isfinite(z)) throw ConfigError("WTransform::w_inv: non-finite argument");
    // Geometric bracket growth around [-1, 1].
    double lo = -1.0, hi = 1.0, span = 1.0;
    while (w(lo) > z) { lo -= span; span *= 2.0; }
    span = 1.0;
    while (w(hi) < z) { hi += span; span *= 2.0; }
    double flo = w(lo) - z;
    double y = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        double fy = w(y) - z;
        if (std::abs(fy) <= 1e-12) return y;
        if ((fy < 0.0) == (flo < 0.0)) { lo = y; flo = fy; }
        else { hi = y; }
        // Newton step where the derivative is healthy, bisection otherwise.
        double dw = std::sqrt(2.0 * std::max(0.0, well_.psi_tilde(y)));
        double ynewton = (dw > 1e-6) ? y - fy / dw : y;
        y = (ynewton > lo && ynewton < hi) ? ynewton : 0.5 * (lo + hi);
        if (hi - lo < 1e-15 * (1.0 + std::abs(y))) break;
    }
    return y;
}

namespace {

// Ratio (|y|-1)^2 / psi(y); at the minima both vanish and the two-sided limit
// via second derivatives 2 / ddpsi(y) applies.
double c0_ratio(const DoubleWell& well, double y) {
    double num = (std::abs(y) - 1.0) * (std::abs(y) - 1.0);
    double den = well.psi(y);
    if (den > 1e-14) return num / den;
    double dd = well.ddpsi(y);
    if (dd > 0.0) return 2.0 / dd;
    return 0.0;
}

double c1_ratio(const std::function<double(double)>& w, double y1, double y2) {
    double d = y1 - y2;
    return std::abs(w(y1) - w(y2)) / (d * d);
}

}  // namespace

double normalization_error(const DoubleWell& well) {
    double I = adaptive_quadrature(
        [&well](double s) { return std::sqrt(2.0 * std::max(0.0, well.psi(s))); }, -1.0, 1.0,
        1e-12);
    return std::abs(I - 1.0);
}

PotentialConstants discover_constants(const DoubleWell& well, const WTransform& wt) {
    PotentialConstants out;
    const double scan_lo = -3.0, scan_hi = 3.0;
    const double coarse = 1e-3, fine = 1e-4;

    // --- C0: max of (|y|-1)^2 / psi over the scan grid, locally refined.
    {
        double best = 0.0, arg = 0.0;
        const int n = static_cast<int>(std::lround((scan_hi - scan_lo) / coarse));
        for (int k = 0; k <= n; ++k) {
            double y = scan_lo + k * coarse;
            double r = c0_ratio(well, y);
            if (r > best) { best = r; arg = y; }
        }
        for (double step = coarse; step > 1e-7; step *= 0.1) {
            for (int k = -20; k <= 20; ++k) {
                double y = arg + k * step * 0.1;
                double r = c0_ratio(well, y);
                if (r > best) { best = r; arg = y; }
            }
        }
        out.C0 = best * (1.0 + 1e-6);  // headroom for off-grid maxima
    }

    // --- C1: min pairwise ratio |w(y1)-w(y2)| / |y1-y2|^2 over the grid.
    {
        const int n = static_cast<int>(std::lround((scan_hi - scan_lo) / coarse));
        std::vector<double> ys(n + 1), ws(n + 1);
        for (int k = 0; k <= n; ++k) {
            ys[k] = scan_lo + k * coarse;
            ws[k] = wt.w(ys[k]);
        }
        double best = std::numeric_limits<double>::infinity();
        double a1 = 0.0, a2 = 0.0;
        for (int i = 0; i <= n; ++i)
            for (int j = i + 1; j <= n; ++j) {
                double d = ys[j] - ys[i];
                double r = std::abs(ws[j] - ws[i]) / (d * d);
                if (r < best) { best = r; a1 = ys[i]; a2 = ys[j]; }
            }
        auto wfn = [&wt](double y) { return wt.w(y); };
        for (double step = coarse; step > 1e-6; step *= 0.1)
            for (int k1 = -10; k1 <= 10; ++k1)
                for (int k2 = -10; k2 <= 10; ++k2) {
                    double y1 = a1 + k1 * step * 0.1, y2 = a2 + k2 * step * 0.1;
                    if (std::abs(y1 - y2) < 1e-9) continue;
                    double r = c1_ratio(wfn, y1, y2);
                    if (r < best) { best = r; a1 = y1; a2 = y2; }
                }
        out.C1 = best * (1.0 - 1e-6);
    }

    // --- c0: largest c in (0,1) with ddpsi(y) >= c |y|^(q-2) for |y| > 1-c.
    {
        const double q = well.growth_exponent();
        auto holds = [&](double c) {
            for (double y = 1.0 - c; y <= 8.0; y += 1e-3) {
                double bound = c * std::pow(std::abs(y), q - 2.0);
                if (well.ddpsi(y) < bound || well.ddpsi(-y) < bound) return false;
            }
            return true;
        };
        double lo = 0.0, hi = 1.0;
        if (holds(1.0 - 1e-9)) {
            lo = 1.0 - 1e-9;
        } else {
            for (int it = 0; it < 50; ++it) {
                double mid = 0.5 * (lo + hi);
                (holds(mid) ? lo : hi) = mid;
            }
        }
        out.c0 = lo * (1.0 - 1e-6);
        if (!(out.c0 > 0.0))
            throw std::logic_error("discover_constants: no growth constant c0 found");
    }

    // --- k0, k1: psi >= k0 |y|^q - k1 on |y| > 1-c0. Anchor k0 at half the
    // tail ratio, then take k1 as the worst shortfall over the scan.
    {
        const double q = well.growth_exponent();
        double tail = std::numeric_limits<double>::infinity();
        for (double y = 4.0; y <= 8.0; y += 0.01)
            tail = std::min({tail, well.psi(y) / std::pow(y, q), well.psi(-y) / std::pow(y, q)});
        out.k0 = 0.5 * tail;
        double k1 = 0.0;
        for (double y = 1.0 - out.c0; y <= 8.0; y += 1e-3) {
            k1 = std::max(k1, out.k0 * std::pow(y, q) - well.psi(y));
            k1 = std::max(k1, out.k0 * std::pow(y, q) - well.psi(-y));
        }
        out.k1 = k1 * (1.0 + 1e-6) + 1e-12;
    }

    // --- Verification on the finer grid; a violation means the scan or the
    // quadrature produced an unusable constant.
    {
        const int n = static_cast<int>(std::lround((scan_hi - scan_lo) / fine));
        for (int k = 0; k <= n; ++k) {
            double y = scan_lo + k * fine;
            double lhs = (std::abs(y) - 1.0) * (std::abs(y) - 1.0);
            if (lhs > out.C0 * well.psi(y) + 1e-12)
                throw std::logic_error("discover_constants: C0 verification failed at y=" +
                                       std::to_string(y));
        }
        // Pair verification: a strided lattice plus seeded random pairs drawn
        // from the fine grid.
        auto check_pair = [&](double y1, double y2) {
            if (std::abs(y1 - y2) < 1e-9) return;
            double lhs = out.C1 * (y1 - y2) * (y1 - y2);
            double mid = std::abs(wt.w(y1) - wt.w(y2));
            double rhs = std::sqrt(2.0) * std::abs(y1 - y2) * (1.0 + std::abs(y1) + std::abs(y2));
            if (lhs > mid + 1e-12 || mid > rhs + 1e-12)
                throw std::logic_error("discover_constants: C1 verification failed at pair (" +
                                       std::to_string(y1) + ", " + std::to_string(y2) + ")");
        };
        const double stride = 5e-2;
        const int m = static_cast<int>(std::lround((scan_hi - scan_lo) / stride));
        for (int i = 0; i <= m; ++i)
            for (int j = i + 1; j <= m; ++j)
                check_pair(scan_lo + i * stride, scan_lo + j * stride);
        SplitMix64 rng(0x5eedULL);
        for (int k = 0; k < 10000; ++k) {
            double y1 = scan_lo + fine * std::floor(rng.next_double() * (n + 1));
            double y2 = scan_lo + fine * std::floor(rng.next_double() * (n + 1));
            check_pair(y1, y2);
        }
    }
    return out;
}

}  // namespace chd
