#include "vibratrak/vprnm.hpp"

#include <cmath>
#include <sstream>

#include "vibratrak/aft.hpp"
#include "vibratrak/analysis.hpp"
#include "vibratrak/errors.hpp"

namespace vibratrak {

namespace {

HarmonicVector truncate_below(const HarmonicVector& X, int n) {
    HarmonicVector Xt = X;
    Xt.tail(Xt.size() - idx_cos(n)).setZero();  // zero harmonics >= n
    return Xt;
}

HarmonicVector keep_only(const HarmonicVector& X, int n) {
    HarmonicVector Xn = HarmonicVector::Zero(X.size());
    Xn[idx_cos(n)] = X[idx_cos(n)];
    Xn[idx_sin(n)] = X[idx_sin(n)];
    return Xn;
}

}  // namespace

BroadbandForce broadband_force(const SystemConfig& sys, const HarmonicVector& X, double omega,
                               int n, const HbmOptions& opts) {
    const int H = num_harmonics(X);
    if (n < 2 || n > H) throw std::invalid_argument("broadband_force: need 2 <= n <= H");
    const HarmonicVector Xt = truncate_below(X, n);
    AftResult res = aft_dispatch(sys.force, Xt, omega, sys.Nt, /*jacobian=*/false, opts.fast_aft);
    return BroadbandForce{n, -res.F[idx_cos(n)], -res.F[idx_sin(n)]};
}

Eigen::Vector2d superposition_force(const SystemConfig& sys, const HarmonicVector& X, double omega,
                                    int k, int n, const HbmOptions& opts) {
    const int H = num_harmonics(X);
    if (k < 1 || k > H || n < 2 || n > H)
        throw std::invalid_argument("superposition_force: need 1 <= k <= H and 2 <= n <= H");
    auto force_of = [&](const HarmonicVector& Xi) {
        return aft_dispatch(sys.force, Xi, omega, sys.Nt, /*jacobian=*/false, opts.fast_aft).F;
    };
    const HarmonicVector Fsum =
        force_of(X) - force_of(keep_only(X, n)) - force_of(truncate_below(X, n));
    return Eigen::Vector2d(-Fsum[idx_cos(k)], -Fsum[idx_sin(k)]);
}

double decomposition_check(const SystemConfig& sys, const HarmonicVector& X, double omega, int n,
                           const HbmOptions& opts) {
    auto force_of = [&](const HarmonicVector& Xi) {
        return aft_dispatch(sys.force, Xi, omega, sys.Nt, /*jacobian=*/false, opts.fast_aft).F;
    };
    const HarmonicVector F_full = force_of(X);
    const HarmonicVector F_alone = force_of(keep_only(X, n));
    const BroadbandForce broad = broadband_force(sys, X, omega, n, opts);
    const Eigen::Vector2d sup = superposition_force(sys, X, omega, n, n, opts);
    const double dc = F_full[idx_cos(n)] - (F_alone[idx_cos(n)] - broad.Fc - sup[0]);
    const double ds = F_full[idx_sin(n)] - (F_alone[idx_sin(n)] - broad.Fs - sup[1]);
    return std::max(std::abs(dc), std::abs(ds));
}

double expected_phase(const BroadbandForce& broad) {
    if (broad.magnitude() == 0.0)
        throw std::domain_error("expected_phase: zero broadband magnitude, phase undefined");
    return wrap_phase(std::atan2(broad.Fs, broad.Fc) + M_PI / 2.0);
}

VprnmResidual vprnm_residual(const SystemConfig& sys, const HarmonicVector& X, double omega,
                             double F, int n, const HbmOptions& opts) {
    const int H = num_harmonics(X);
    if (n < 2 || n > H) throw std::invalid_argument("vprnm_residual: need 2 <= n <= H");
    const int nc = 2 * H + 1;

    const HbmResidual hbm = hbm_residual(sys, X, omega, F, opts);

    // Broadband force of the truncated motion with its derivative blocks.
    const HarmonicVector Xt = truncate_below(X, n);
    const AftResult trunc = aft_dispatch(sys.force, Xt, omega, sys.Nt, /*jacobian=*/true, opts.fast_aft);
    const int ic = idx_cos(n), is = idx_sin(n);
    Eigen::Vector2d u(-trunc.F[ic], -trunc.F[is]);
    const double mag = u.norm();
    const double floor = 1e-13 * sys.k_lin * sys.x_ref;
    if (mag < floor) {
        std::ostringstream msg;
        msg << "vprnm: broadband excitation of harmonic " << n << " vanished (|F_broad| = " << mag
            << "); no trackable superharmonic at this state";
        throw VanishingBroadband(msg.str());
    }

    // du/dX: rows n of the truncated AFT Jacobian; columns of harmonics >= n
    // do not act on the truncated motion.
    Eigen::Matrix<double, 2, Eigen::Dynamic> du_dX(2, nc);
    du_dX.row(0) = -trunc.dF_dX.row(ic);
    du_dX.row(1) = -trunc.dF_dX.row(is);
    du_dX.rightCols(nc - idx_cos(n)).setZero();
    const Eigen::Vector2d du_domega(-trunc.dF_domega[ic], -trunc.dF_domega[is]);

    const Eigen::Vector2d uhat = u / mag;
    const Eigen::Vector2d b(X[ic], X[is]);
    // d(u/|u|)^T b = b^T (I - uhat uhat^T)/|u| du
    const Eigen::RowVector2d bP = (b.transpose() - b.dot(uhat) * uhat.transpose()) / mag;

    VprnmResidual out;
    out.broad = BroadbandForce{n, u[0], u[1]};
    out.r.resize(nc + 1);
    out.r.head(nc) = hbm.R;
    out.r[nc] = uhat.dot(b);

    out.J.setZero(nc + 1, nc + 2);
    out.J.topLeftCorner(nc, nc) = hbm.dR_dX;
    out.J.col(nc).head(nc) = hbm.dR_domega;
    out.J.col(nc + 1).head(nc) = hbm.dR_dF;
    Eigen::RowVectorXd dc_dX = bP * du_dX;
    dc_dX[ic] += uhat[0];
    dc_dX[is] += uhat[1];
    out.J.row(nc).head(nc) = dc_dX;
    out.J(nc, nc) = bP * du_domega;
    out.J(nc, nc + 1) = 0.0;
    return out;
}

namespace {

/// Damped Newton on (X, omega) at fixed force level from an explicit
/// (X, omega) start. The frequency component is trust-region limited;
/// otherwise the first step can jump across a sharp low-force resonance.
/// Returns false when the iteration stalls above tolerance.
bool vprnm_newton(const SystemConfig& sys, int n, double F, const VprnmOptions& opts,
                  Eigen::VectorXd& u, double& norm, long long* solves) {
    const int nc = 2 * sys.H + 1;
    VprnmResidual res = vprnm_residual(sys, u.head(nc), u[nc], F, n, opts.hbm);
    norm = res.r.lpNorm<Eigen::Infinity>();
    const double tol = opts.continuation.tol;
    for (int it = 0; it < 50 && norm > tol; ++it) {
        Eigen::VectorXd step = res.J.leftCols(nc + 1).colPivHouseholderQr().solve(-res.r);
        if (solves) ++(*solves);
        if (!step.allFinite()) break;
        const double cap = 0.05 * std::max(std::abs(u[nc]), 1e-6);
        if (std::abs(step[nc]) > cap) step *= cap / std::abs(step[nc]);
        double scale = 1.0;
        bool accepted = false;
        for (int h = 0; h < 9; ++h) {
            Eigen::VectorXd ut = u;
            ut.head(nc + 1) += scale * step;
            VprnmResidual rt;
            try {
                rt = vprnm_residual(sys, ut.head(nc), ut[nc], F, n, opts.hbm);
            } catch (const SolverError&) {
                scale *= 0.5;
                continue;
            }
            const double nt = rt.r.lpNorm<Eigen::Infinity>();
            if (std::isfinite(nt) && nt < norm) {
                u = ut;
                res = std::move(rt);
                norm = nt;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if (!accepted) break;
    }
    return norm <= tol;
}

/// Normalized orthogonality constraint along the HBM solution at (omega, F).
double constraint_at(const SystemConfig& sys, int n, double omega, double F,
                     const VprnmOptions& opts, HarmonicVector& X_warm, long long* solves) {
    try {
        X_warm = solve_hbm(sys, X_warm, omega, F, opts.hbm, solves);
    } catch (const NonConvergence&) {
        // sharp resonances can defeat the warm start between scan points
        X_warm = robust_hbm_solve(sys, omega, F, opts.hbm, solves);
    }
    const BroadbandForce b = broadband_force(sys, X_warm, omega, n, opts.hbm);
    const double mag = b.magnitude();
    if (mag < 1e-13 * sys.k_lin * sys.x_ref)
        throw VanishingBroadband("vprnm: broadband excitation vanished during the seed scan");
    return (b.Fc * X_warm[idx_cos(n)] + b.Fs * X_warm[idx_sin(n)]) / mag;
}

/// Converge one resonance point at fixed force level. Tries the plain Newton
/// start at omega_seed first; when the resonance basin is too narrow for that
/// (sharp superharmonics rotate the constraint within a sliver of frequency),
/// brackets the constraint sign change over a frequency scan and bisects
/// before handing over to Newton.
BranchPoint vprnm_point_solve(const SystemConfig& sys, int n, double F, double omega_seed,
                              const VprnmOptions& opts, long long* solves) {
    const int nc = 2 * sys.H + 1;
    Eigen::VectorXd u(nc + 2);
    u.head(nc) = robust_hbm_solve(sys, omega_seed, F, opts.hbm, solves);
    u[nc] = omega_seed;
    u[nc + 1] = F;
    double norm = 0.0;
    if (vprnm_newton(sys, n, F, opts, u, norm, solves)) return BranchPoint{u, norm, 0.0};

    // Scan a bracket around the seed frequency for the constraint zero.
    const int grid = 25;
    const double lo = 0.85 * omega_seed, hi = 1.15 * omega_seed;
    HarmonicVector X_warm = linear_frf(sys, lo, F);
    double prev_omega = lo;
    double prev_c = constraint_at(sys, n, lo, F, opts, X_warm, solves);
    double a = 0.0, b = 0.0, ca = 0.0;
    bool bracketed = false;
    for (int i = 1; i < grid; ++i) {
        const double omega = lo + (hi - lo) * i / (grid - 1);
        const double c = constraint_at(sys, n, omega, F, opts, X_warm, solves);
        if (prev_c * c <= 0.0 && prev_c != c) {
            a = prev_omega;
            b = omega;
            ca = prev_c;
            bracketed = true;
            break;
        }
        prev_omega = omega;
        prev_c = c;
    }
    if (bracketed) {
        // Bisect the crossing; very close to the resonance the fixed-frequency
        // solves can chatter on the kink samples, in which case the bracket at
        // hand is good enough for the augmented Newton (whose constraint row
        // regularizes the near-singular harmonic block).
        for (int it = 0; it < 20 && (b - a) > 1e-6 * omega_seed; ++it) {
            const double mid = 0.5 * (a + b);
            double cm = 0.0;
            try {
                cm = constraint_at(sys, n, mid, F, opts, X_warm, solves);
            } catch (const SolverError&) {
                break;
            }
            if (ca * cm <= 0.0) {
                b = mid;
            } else {
                a = mid;
                ca = cm;
            }
        }
        const double omega_star = 0.5 * (a + b);
        try {
            u.head(nc) = solve_hbm(sys, X_warm, omega_star, F, opts.hbm, solves);
        } catch (const NonConvergence& e) {
            u.head(nc) = e.best_iterate;
        }
        u[nc] = omega_star;
        if (vprnm_newton(sys, n, F, opts, u, norm, solves)) return BranchPoint{u, norm, 0.0};
    }
    std::ostringstream msg;
    msg << "vprnm seed did not converge at F = " << F << " (|r| = " << norm
        << "); try a different force level or frequency bracket around omega0/" << n;
    throw NonConvergence(msg.str(), u, norm);
}

}  // namespace

std::vector<VprnmPoint> vprnm_backbone(const SystemConfig& sys, int n, double F_min, double F_max,
                                       const VprnmOptions& opts, BranchDiagnostics* diag) {
    if (n < 2 || n > sys.H) throw std::invalid_argument("vprnm_backbone: need 2 <= n <= H");

    const int nc = 2 * sys.H + 1;
    ResidualFn fn = [&](const Eigen::VectorXd& y, Eigen::VectorXd& r, Eigen::MatrixXd& J) {
        const VprnmResidual res =
            vprnm_residual(sys, y.head(nc), y[nc], y[nc + 1], n, opts.hbm);
        r = res.r;
        J = res.J;
    };

    // Seed in the low-amplitude regime near omega0/n; a hysteretic element
    // that is still fully stuck there produces no broadband excitation, in
    // which case the requested lower force level is used directly. Zero-width
    // ranges solve at the requested level without the low-force detour.
    const Scales sc = nondimensionalize(sys);
    const double omega_seed = sc.omega0 / n;
    const double a = sys.k_lin - sys.m * omega_seed * omega_seed;
    const double b = sys.c * omega_seed;
    const double F_rule =
        opts.seed_amplitude_fraction * sys.x_ref * std::sqrt(a * a + b * b);

    ContinuationConfig ccfg = opts.continuation;
    ccfg.lambda_max = F_max;

    BranchDiagnostics local;
    BranchDiagnostics& dg = diag ? *diag : local;

    BranchPoint seed;
    if (F_max - F_min <= 0.0) {
        seed = vprnm_point_solve(sys, n, F_min, omega_seed, opts, &dg.corrector_solves);
    } else {
        try {
            seed = vprnm_point_solve(sys, n, std::min(F_rule, F_min), omega_seed, opts,
                                     &dg.corrector_solves);
        } catch (const VanishingBroadband&) {
            seed = vprnm_point_solve(sys, n, F_min, omega_seed, opts, &dg.corrector_solves);
        }
    }
    ccfg.lambda_min = std::min(seed.lambda(), F_min);

    if (F_max - seed.lambda() <= 0.0) {
        // zero-width range (or a seed already at the top): single point
        std::vector<BranchPoint> one{seed};
        std::vector<VprnmPoint> out;
        for (const auto& bp : one) {
            VprnmPoint p;
            p.X = bp.y.head(nc);
            p.omega = bp.y[nc];
            p.F = bp.y[nc + 1];
            const VprnmResidual res = vprnm_residual(sys, p.X, p.omega, p.F, n, opts.hbm);
            p.fbroad_norm = res.broad.magnitude();
            p.constraint_residual = res.r[nc];
            p.residual_norm = res.r.head(nc).lpNorm<Eigen::Infinity>();
            p.phi_n = harmonic_phase(p.X, n);
            p.arc = bp.arc;
            out.push_back(std::move(p));
        }
        return out;
    }

    const std::vector<BranchPoint> branch = continue_branch(fn, seed.y, ccfg, &dg);

    std::vector<VprnmPoint> out;
    out.reserve(branch.size());
    for (const auto& bp : branch) {
        const double F = bp.y[nc + 1];
        if (F < F_min - 1e-12 * std::max(1.0, F_min)) continue;  // seeding scaffold below the range
        VprnmPoint p;
        p.X = bp.y.head(nc);
        p.omega = bp.y[nc];
        p.F = F;
        const VprnmResidual res = vprnm_residual(sys, p.X, p.omega, p.F, n, opts.hbm);
        p.fbroad_norm = res.broad.magnitude();
        p.constraint_residual = res.r[nc];
        p.residual_norm = res.r.head(nc).lpNorm<Eigen::Infinity>();
        p.phi_n = harmonic_phase(p.X, n);
        p.arc = bp.arc;
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace vibratrak
