// Double-well potential and the transform used for total-variation bookkeeping.
//
// The shipped default is the normalized quartic psi(s) = (9/32)(1-s^2)^2,
// whose well-to-well integral of sqrt(2 psi) is exactly 1 and whose 1D
// equilibrium profile is tanh(3 x / (4 eps)). Any C^3 double well with the
// same normalization can be plugged in instead.

#pragma once

#include <functional>
#include <vector>

#include "chd/errors.hpp"

namespace chd {

class DoubleWell {
  public:
    using Fn = std::function<double(double)>;

    DoubleWell(Fn psi, Fn dpsi, Fn ddpsi, double growth_exponent);

    static DoubleWell normalized_quartic();

    double psi(double y) const { return psi_(y); }
    double dpsi(double y) const { return dpsi_(y); }
    double ddpsi(double y) const { return ddpsi_(y); }
    double growth_exponent() const { return q_; }

    // min(psi(y), 1 + y^2); the quadratically capped well.
    double psi_tilde(double y) const;

  private:
    Fn psi_, dpsi_, ddpsi_;
    double q_;
};

// w(y) = integral of sqrt(2 psi_tilde) from -1 to y. Strictly increasing with
// w(-1) = 0; for a normalized well w(1) = 1. Values come from a cumulative
// quadrature table built at construction, refined locally per query.
class WTransform {
  public:
    explicit WTransform(const DoubleWell& well);

    double w(double y) const;
    // Monotone inversion: |w(w_inv(z)) - z| <= 1e-10.
    double w_inv(double z) const;

    const DoubleWell& well() const { return well_; }

  private:
    double integrand(double s) const;
    double segment(double a, double b, double tol) const;

    DoubleWell well_;
    double table_lo_, table_step_;
    std::vector<double> table_;  // cumulative integral, anchored at w(-1) = 0
};

// Constants of the standard well inequalities, discovered by brute-force scan
// and re-verified on a finer grid (a failure there is an internal error).
//
//   (|y| - 1)^2         <= C0 * psi(y)
//   C1 |y1 - y2|^2      <= |w(y1) - w(y2)| <= sqrt(2)|y1 - y2|(1 + |y1| + |y2|)
//   ddpsi(y)            >= c0 |y|^(q-2)   for |y| > 1 - c0
//   psi(y)              >= k0 |y|^q - k1  for |y| > 1 - c0
struct PotentialConstants {
    double C0 = 0.0;
    double C1 = 0.0;
    double c0 = 0.0;
    double k0 = 0.0;
    double k1 = 0.0;
};

PotentialConstants discover_constants(const DoubleWell& well, const WTransform& wt);

// |integral_{-1}^{1} sqrt(2 psi) - 1|, by adaptive quadrature.
double normalization_error(const DoubleWell& well);

// Free quadrature helper (adaptive Simpson, absolute tolerance).
double adaptive_quadrature(const std::function<double(double)>& f, double a, double b,
                           double abs_tol);

}  // namespace chd
