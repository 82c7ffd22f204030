#include "vibratrak/hbm.hpp"

#include <cmath>
#include <sstream>

#include "vibratrak/errors.hpp"

namespace vibratrak {

HarmonicVector external_force_vector(double F, int H) {
    HarmonicVector fe = HarmonicVector::Zero(2 * H + 1);
    fe[idx_cos(1)] = F;
    return fe;
}

Eigen::MatrixXd dynamic_stiffness_block(const SystemConfig& sys, double omega, int n) {
    if (n < 0) throw std::invalid_argument("dynamic_stiffness_block: n must be >= 0");
    if (n == 0) {
        Eigen::MatrixXd E(1, 1);
        E(0, 0) = sys.k;
        return E;
    }
    const double nw = n * omega;
    Eigen::MatrixXd E(2, 2);
    E << sys.k - nw * nw * sys.m, nw * sys.c, -nw * sys.c, sys.k - nw * nw * sys.m;
    return E;
}

HbmResidual hbm_residual(const SystemConfig& sys, const HarmonicVector& X, double omega, double F,
                         const HbmOptions& opts) {
    const int H = num_harmonics(X);
    AftResult nl = aft_dispatch(sys.force, X, omega, sys.Nt, /*jacobian=*/true, opts.fast_aft);

    HbmResidual res;
    res.R = nl.F - external_force_vector(F, H);
    res.dR_dX = nl.dF_dX;
    res.dR_domega = nl.dF_domega;
    res.R[0] += sys.k * X[0];
    res.dR_dX(0, 0) += sys.k;
    for (int n = 1; n <= H; ++n) {
        const Eigen::Matrix2d E = dynamic_stiffness_block(sys, omega, n);
        const int ic = idx_cos(n), is = idx_sin(n);
        res.R[ic] += E(0, 0) * X[ic] + E(0, 1) * X[is];
        res.R[is] += E(1, 0) * X[ic] + E(1, 1) * X[is];
        res.dR_dX(ic, ic) += E(0, 0);
        res.dR_dX(ic, is) += E(0, 1);
        res.dR_dX(is, ic) += E(1, 0);
        res.dR_dX(is, is) += E(1, 1);
        // d/domega of the dynamic stiffness block
        res.dR_domega[ic] += -2.0 * n * n * omega * sys.m * X[ic] + n * sys.c * X[is];
        res.dR_domega[is] += -2.0 * n * n * omega * sys.m * X[is] - n * sys.c * X[ic];
    }
    res.dR_dF = Eigen::VectorXd::Zero(2 * H + 1);
    res.dR_dF[idx_cos(1)] = -1.0;
    return res;
}

HarmonicVector solve_hbm(const SystemConfig& sys, const HarmonicVector& X_guess, double omega,
                         double F, const HbmOptions& opts, long long* newton_iters) {
    if (!X_guess.allFinite()) throw std::invalid_argument("solve_hbm: non-finite initial guess");

    HarmonicVector X = X_guess;
    HbmResidual res = hbm_residual(sys, X, omega, F, opts);
    double norm = res.R.lpNorm<Eigen::Infinity>();
    HarmonicVector best_X = X;
    double best_norm = norm;

    for (int it = 0; it < opts.max_iter; ++it) {
        if (norm <= opts.tol) return X;
        Eigen::VectorXd step = res.dR_dX.colPivHouseholderQr().solve(-res.R);
        if (newton_iters) ++(*newton_iters);
        if (!step.allFinite()) break;

        double scale = 1.0;
        bool accepted = false;
        for (int h = 0; h <= opts.max_halvings; ++h) {
            HarmonicVector X_try = X + scale * step;
            HbmResidual res_try = hbm_residual(sys, X_try, omega, F, opts);
            const double norm_try = res_try.R.lpNorm<Eigen::Infinity>();
            if (std::isfinite(norm_try) && norm_try < norm) {
                X = X_try;
                res = std::move(res_try);
                norm = norm_try;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if (!accepted) break;
        if (norm < best_norm) {
            best_norm = norm;
            best_X = X;
        }
    }
    if (norm <= opts.tol) return X;
    std::ostringstream msg;
    msg << "solve_hbm: no convergence (|R|_inf = " << best_norm << " at omega = " << omega
        << ", F = " << F << ")";
    throw NonConvergence(msg.str(), best_X, best_norm);
}

HarmonicVector linear_frf(const SystemConfig& sys, double omega, double F) {
    HarmonicVector X = HarmonicVector::Zero(2 * sys.H + 1);
    const double a = sys.k_lin - sys.m * omega * omega;
    const double b = sys.c * omega;
    const double den = a * a + b * b;
    X[idx_cos(1)] = F * a / den;
    X[idx_sin(1)] = F * b / den;
    return X;
}

namespace {

/// One Picard pass: X = E(omega)^-1 (F_ext - F_nl(X_lin)). Near a harmonic's
/// resonance the dynamic stiffness is regularized by damping, so this places
/// resonantly amplified higher harmonics into the seed.
HarmonicVector picard_seed(const SystemConfig& sys, double omega, double F,
                           const HbmOptions& opts) {
    const HarmonicVector X0 = linear_frf(sys, omega, F);
    const AftResult nl = aft_dispatch(sys.force, X0, omega, sys.Nt, /*jacobian=*/false, opts.fast_aft);
    const HarmonicVector rhs = external_force_vector(F, sys.H) - nl.F;
    HarmonicVector X = X0;
    if (std::abs(sys.k) > 1e-14) X[0] = rhs[0] / sys.k;
    for (int n = 1; n <= sys.H; ++n) {
        const double a = sys.k - (n * omega) * (n * omega) * sys.m;
        const double b = n * omega * sys.c;
        const double det = a * a + b * b;
        if (det < 1e-300) continue;
        const int ic = idx_cos(n), is = idx_sin(n);
        X[ic] = (a * rhs[ic] - b * rhs[is]) / det;
        X[is] = (b * rhs[ic] + a * rhs[is]) / det;
    }
    return X;
}

}  // namespace

HarmonicVector robust_hbm_solve(const SystemConfig& sys, double omega, double F,
                                const HbmOptions& opts, long long* newton_iters) {
    try {
        return solve_hbm(sys, linear_frf(sys, omega, F), omega, F, opts, newton_iters);
    } catch (const SolverError&) {
    }
    try {
        return solve_hbm(sys, picard_seed(sys, omega, F, opts), omega, F, opts, newton_iters);
    } catch (const SolverError&) {
    }
    HarmonicVector X = linear_frf(sys, omega, F / 64.0);
    for (double Fr = F / 64.0;; Fr = std::min(2.0 * Fr, F)) {
        X = solve_hbm(sys, X, omega, Fr, opts, newton_iters);
        if (Fr >= F) return X;
    }
}

}  // namespace vibratrak
