#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace vibratrak {

/// Harmonic coefficient vector, ordered [X0, X1c, X1s, ..., XHc, XHs].
/// Length is always 2H+1. Used both for displacements and for forces;
/// the role follows from context.
using HarmonicVector = Eigen::VectorXd;

/// Highest harmonic represented by a coefficient vector of length 2H+1.
inline int num_harmonics(const HarmonicVector& x) {
    if (x.size() < 1 || x.size() % 2 == 0)
        throw std::invalid_argument("harmonic vector must have odd length 2H+1");
    return static_cast<int>((x.size() - 1) / 2);
}

/// Index of the cosine coefficient of harmonic k >= 1.
inline int idx_cos(int k) { return 2 * k - 1; }
/// Index of the sine coefficient of harmonic k >= 1.
inline int idx_sin(int k) { return 2 * k; }

/// Wrap an angle to (-pi, pi]; the -pi boundary maps to +pi.
inline double wrap_phase(double phi) {
    double w = std::remainder(phi, 2.0 * M_PI);
    if (w <= -M_PI) w += 2.0 * M_PI;
    return w;
}

/// Wrap an angle to [-pi, pi); the +pi boundary maps to -pi.
/// Used for broadband excitation phases, which are reported on this branch.
inline double wrap_phase_low(double phi) {
    double w = std::remainder(phi, 2.0 * M_PI);
    if (w >= M_PI) w -= 2.0 * M_PI;
    return w;
}

}  // namespace vibratrak
