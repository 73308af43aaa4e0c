// Uniform cell-centered grid in 1D/2D with staggered (MAC) face storage and
// mimetic gradient/divergence/advection stencils under no-flux boundaries.
//
// Scalars live at cell centers, vector quantities as face-normal components.
// Boundary faces of any flux-like field are identically zero, which encodes
// the homogeneous Neumann / impermeable-wall closure and makes summation by
// parts exact: <div F, c> = -<F, grad c> for every F with zero boundary faces.

#pragma once

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <string>

#include "chd/errors.hpp"

namespace chd {

struct GridSpec {
    int dim = 1;
    int nx = 0, ny = 1;      // ny == 1 in 1D
    double lx = 1.0, ly = 1.0;
    double hx = 0.0, hy = 1.0;  // hy := 1 in 1D so that cell volume = hx*hy

    static GridSpec make_1d(int nx, double lx) {
        if (nx < 4) throw ConfigError("grid: nx must be >= 4, got " + std::to_string(nx));
        if (!(lx > 0.0)) throw ConfigError("grid: lx must be positive");
        GridSpec g;
        g.dim = 1;
        g.nx = nx;
        g.ny = 1;
        g.lx = lx;
        g.ly = 1.0;
        g.hx = lx / nx;
        g.hy = 1.0;
        return g;
    }

    static GridSpec make_2d(int nx, int ny, double lx, double ly) {
        if (nx < 4 || ny < 4)
            throw ConfigError("grid: nx and ny must be >= 4 in 2D");
        if (!(lx > 0.0) || !(ly > 0.0)) throw ConfigError("grid: lx, ly must be positive");
        GridSpec g;
        g.dim = 2;
        g.nx = nx;
        g.ny = ny;
        g.lx = lx;
        g.ly = ly;
        g.hx = lx / nx;
        g.hy = ly / ny;
        return g;
    }

    int num_cells() const { return nx * ny; }
    double cell_volume() const { return hx * hy; }
    double domain_volume() const { return lx * (dim == 2 ? ly : 1.0); }
    double min_h() const { return dim == 2 ? std::min(hx, hy) : hx; }

    // Cell-center coordinates.
    double xc(int i) const { return (i + 0.5) * hx; }
    double yc(int j) const { return dim == 2 ? (j + 0.5) * hy : 0.0; }

    // Row-major cell index (x fastest).
    int cidx(int i, int j) const { return j * nx + i; }
    // x-face index, i in [0, nx], j in [0, ny).
    int xfidx(int i, int j) const { return j * (nx + 1) + i; }
    // y-face index, i in [0, nx), j in [0, ny].
    int yfidx(int i, int j) const { return j * nx + i; }

    bool same_as(const GridSpec& o) const {
        return dim == o.dim && nx == o.nx && ny == o.ny && lx == o.lx && ly == o.ly;
    }
};

template <class Scalar>
struct ScalarFieldT {
    using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

    GridSpec grid;
    Array data;

    ScalarFieldT() = default;
    explicit ScalarFieldT(const GridSpec& g, Scalar fill = Scalar(0))
        : grid(g), data(Array::Constant(g.num_cells(), fill)) {}

    Scalar& operator()(int i, int j) { return data[grid.cidx(i, j)]; }
    Scalar operator()(int i, int j) const { return data[grid.cidx(i, j)]; }
    Scalar& operator()(int i) { return data[i]; }
    Scalar operator()(int i) const { return data[i]; }

    bool finite() const { return data.isFinite().all(); }
};

template <class Scalar>
struct FaceFieldT {
    using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

    GridSpec grid;
    Array x_faces;  // (nx+1)*ny
    Array y_faces;  // nx*(ny+1); empty in 1D

    FaceFieldT() = default;
    explicit FaceFieldT(const GridSpec& g, Scalar fill = Scalar(0))
        : grid(g),
          x_faces(Array::Constant((g.nx + 1) * g.ny, fill)),
          y_faces(g.dim == 2 ? Array::Constant(g.nx * (g.ny + 1), fill) : Array()) {}

    Scalar& xf(int i, int j) { return x_faces[grid.xfidx(i, j)]; }
    Scalar xf(int i, int j) const { return x_faces[grid.xfidx(i, j)]; }
    Scalar& yf(int i, int j) { return y_faces[grid.yfidx(i, j)]; }
    Scalar yf(int i, int j) const { return y_faces[grid.yfidx(i, j)]; }

    bool finite() const {
        return x_faces.isFinite().all() && (grid.dim == 1 || y_faces.isFinite().all());
    }

    Scalar max_abs() const {
        Scalar m = x_faces.size() ? x_faces.abs().maxCoeff() : Scalar(0);
        if (grid.dim == 2 && y_faces.size()) m = std::max(m, y_faces.abs().maxCoeff());
        return m;
    }

    // Force the boundary-normal components to exactly zero.
    void zero_boundary() {
        for (int j = 0; j < grid.ny; ++j) {
            xf(0, j) = Scalar(0);
            xf(grid.nx, j) = Scalar(0);
        }
        if (grid.dim == 2) {
            for (int i = 0; i < grid.nx; ++i) {
                yf(i, 0) = Scalar(0);
                yf(i, grid.ny) = Scalar(0);
            }
        }
    }
};

using ScalarField = ScalarFieldT<double>;
using FaceField = FaceFieldT<double>;

// Sample f(x) (1D) or f(x,y) (2D) at cell centers.
template <class Scalar = double, class Fn>
ScalarFieldT<Scalar> sample(const GridSpec& g, Fn&& f) {
    ScalarFieldT<Scalar> out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            out(i, j) = g.dim == 2 ? f(g.xc(i), g.yc(j)) : f(g.xc(i));
    return out;
}

template <class Scalar>
Scalar mean(const ScalarFieldT<Scalar>& f) {
    return f.data.sum() / Scalar(f.grid.num_cells());
}

template <class Scalar>
Scalar integral(const ScalarFieldT<Scalar>& f) {
    return f.data.sum() * f.grid.cell_volume();
}

// Volume-weighted inner products; the pairing under which the stencils below
// are exact adjoints.
template <class Scalar>
Scalar cell_inner(const ScalarFieldT<Scalar>& a, const ScalarFieldT<Scalar>& b) {
    return (a.data * b.data).sum() * a.grid.cell_volume();
}

template <class Scalar>
Scalar face_inner(const FaceFieldT<Scalar>& a, const FaceFieldT<Scalar>& b) {
    Scalar s = (a.x_faces * b.x_faces).sum();
    if (a.grid.dim == 2) s += (a.y_faces * b.y_faces).sum();
    return s * a.grid.cell_volume();
}

template <class Scalar>
Scalar l2_norm(const ScalarFieldT<Scalar>& f) {
    return std::sqrt(cell_inner(f, f));
}

template <class Scalar>
Scalar l2_norm(const FaceFieldT<Scalar>& f) {
    return std::sqrt(face_inner(f, f));
}

// Cell-centered gradient to faces. Interior face: difference of the two
// adjacent cells over h; boundary faces are zero (Neumann closure).
template <class Scalar>
FaceFieldT<Scalar> grad_cc_to_face(const ScalarFieldT<Scalar>& c) {
    const GridSpec& g = c.grid;
    FaceFieldT<Scalar> out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i)
            out.xf(i, j) = (c(i, j) - c(i - 1, j)) / g.hx;
    if (g.dim == 2)
        for (int j = 1; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                out.yf(i, j) = (c(i, j) - c(i, j - 1)) / g.hy;
    return out;
}

// Face divergence back to cell centers (negative adjoint of grad_cc_to_face).
template <class Scalar>
ScalarFieldT<Scalar> div_face_to_cc(const FaceFieldT<Scalar>& F) {
    const GridSpec& g = F.grid;
    ScalarFieldT<Scalar> out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            Scalar d = (F.xf(i + 1, j) - F.xf(i, j)) / g.hx;
            if (g.dim == 2) d += (F.yf(i, j + 1) - F.yf(i, j)) / g.hy;
            out(i, j) = d;
        }
    return out;
}

// Arithmetic average of the two adjacent cells onto interior faces; boundary
// faces copy the adjacent cell. Used to place mobilities m(phi), n(phi) on faces.
template <class Scalar>
FaceFieldT<Scalar> face_interp(const ScalarFieldT<Scalar>& c) {
    const GridSpec& g = c.grid;
    FaceFieldT<Scalar> out(g);
    for (int j = 0; j < g.ny; ++j) {
        out.xf(0, j) = c(0, j);
        out.xf(g.nx, j) = c(g.nx - 1, j);
        for (int i = 1; i < g.nx; ++i)
            out.xf(i, j) = Scalar(0.5) * (c(i - 1, j) + c(i, j));
    }
    if (g.dim == 2) {
        for (int i = 0; i < g.nx; ++i) {
            out.yf(i, 0) = c(i, 0);
            out.yf(i, g.ny) = c(i, g.ny - 1);
        }
        for (int j = 1; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                out.yf(i, j) = Scalar(0.5) * (c(i, j - 1) + c(i, j));
    }
    return out;
}

// div(coef * grad c) with no-flux closure. Symmetric negative semidefinite,
// annihilates constants, output has exactly zero sum.
template <class Scalar>
ScalarFieldT<Scalar> weighted_laplacian(const FaceFieldT<Scalar>& coef,
                                        const ScalarFieldT<Scalar>& c) {
    const GridSpec& g = c.grid;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i)
            if (!(coef.xf(i, j) > Scalar(0)))
                throw ConfigError("weighted_laplacian: non-positive interior face coefficient");
    if (g.dim == 2)
        for (int j = 1; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                if (!(coef.yf(i, j) > Scalar(0)))
                    throw ConfigError("weighted_laplacian: non-positive interior face coefficient");

    FaceFieldT<Scalar> flux = grad_cc_to_face(c);
    flux.x_faces *= coef.x_faces;
    if (g.dim == 2) flux.y_faces *= coef.y_faces;
    return div_face_to_cc(flux);
}

// Unit-coefficient Laplacian (5-point / 3-point) with the same closure.
template <class Scalar>
ScalarFieldT<Scalar> laplacian(const ScalarFieldT<Scalar>& c) {
    return div_face_to_cc(grad_cc_to_face(c));
}

// Conservative first-order upwind advection: returns div(c_up * v) where the
// face value of c is taken from the upwind cell. Output sums to exactly zero.
template <class Scalar>
ScalarFieldT<Scalar> upwind_advect(const ScalarFieldT<Scalar>& c, const FaceFieldT<Scalar>& v) {
    const GridSpec& g = c.grid;
    FaceFieldT<Scalar> flux(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) {
            Scalar vel = v.xf(i, j);
            Scalar up = vel > Scalar(0) ? c(i - 1, j) : c(i, j);
            flux.xf(i, j) = up * vel;
        }
    if (g.dim == 2)
        for (int j = 1; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                Scalar vel = v.yf(i, j);
                Scalar up = vel > Scalar(0) ? c(i, j - 1) : c(i, j);
                flux.yf(i, j) = up * vel;
            }
    return div_face_to_cc(flux);
}

}  // namespace chd
