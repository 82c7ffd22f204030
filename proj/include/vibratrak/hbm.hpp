#pragma once

#include <Eigen/Dense>

#include "vibratrak/aft.hpp"
#include "vibratrak/model.hpp"

namespace vibratrak {

/// External forcing F cos(omega t): fundamental cosine only, F >= 0.
struct ExternalForcing {
    double F = 0.0;
};

/// F placed on the fundamental cosine entry of a length-2H+1 vector.
HarmonicVector external_force_vector(double F, int H);

struct HbmResidual {
    Eigen::VectorXd R;        // 2H+1
    Eigen::MatrixXd dR_dX;    // (2H+1) x (2H+1)
    Eigen::VectorXd dR_domega;
    Eigen::VectorXd dR_dF;
};

/// Linear dynamic stiffness of harmonic n: the 1x1 block [k] for n = 0, and
///   [[k - (n w)^2 m,  n w c], [-n w c,  k - (n w)^2 m]]
/// acting on (X_nc, X_ns) for n >= 1.
Eigen::MatrixXd dynamic_stiffness_block(const SystemConfig& sys, double omega, int n);

struct HbmOptions {
    double tol = 1e-9;      // convergence on the residual infinity norm
    int max_iter = 30;
    int max_halvings = 8;
    bool fast_aft = true;   // reversal-point AFT for hysteretic models
};

/// R = E(omega) X + F_nl(X, omega) - F_ext(F), with all derivative blocks.
HbmResidual hbm_residual(const SystemConfig& sys, const HarmonicVector& X, double omega, double F,
                         const HbmOptions& opts = {});

/// Damped Newton (step halving) on the full harmonic balance system at fixed
/// (omega, F). Throws NonConvergence with the best iterate on failure.
/// newton_iters, when given, accumulates the linear solves spent.
HarmonicVector solve_hbm(const SystemConfig& sys, const HarmonicVector& X_guess, double omega,
                         double F, const HbmOptions& opts = {}, long long* newton_iters = nullptr);

/// Closed-form response of the linearized system (k_lin in place of the
/// nonlinearity) to F cos(omega t); used for seeding and as a test oracle.
HarmonicVector linear_frf(const SystemConfig& sys, double omega, double F);

/// solve_hbm with a seeding cascade for strongly nonlinear states: linear
/// prediction, then one Picard pass through the dynamic stiffness (captures
/// resonant higher harmonics), then a geometric force ramp.
HarmonicVector robust_hbm_solve(const SystemConfig& sys, double omega, double F,
                                const HbmOptions& opts = {}, long long* newton_iters = nullptr);

}  // namespace vibratrak
