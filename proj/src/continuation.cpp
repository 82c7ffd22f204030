#include "vibratrak/continuation.hpp"

#include <cmath>
#include <sstream>

#include "vibratrak/errors.hpp"

namespace vibratrak {

namespace {

Eigen::VectorXd metric_weights(const Eigen::VectorXd& y, const ContinuationConfig& cfg) {
    const auto m = y.size() - 1;
    Eigen::VectorXd d(y.size());
    const double wu = cfg.weight_u > 0.0
                          ? cfg.weight_u
                          : 1.0 / std::max(y.head(m).norm(), cfg.scale_floor);
    const double wl = cfg.weight_lambda > 0.0
                          ? cfg.weight_lambda
                          : 1.0 / std::max(std::abs(y[m]), cfg.scale_floor);
    d.head(m).setConstant(wu);
    d[m] = wl;
    return d;
}

/// Null vector of the m x (m+1) Jacobian, normalized in the scaled metric.
Eigen::VectorXd tangent_vector(const Eigen::MatrixXd& J, const Eigen::VectorXd& d) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(J.transpose());
    Eigen::VectorXd t = qr.householderQ() * Eigen::VectorXd::Unit(J.cols(), J.cols() - 1);
    const double s = (d.array() * t.array()).matrix().norm();
    if (s > 0.0) t /= s;
    return t;
}

/// Newton corrector in the hyperplane through y_pred orthogonal (in the
/// scaled metric) to the predictor tangent. Returns iterations used, or -1.
int orthogonal_corrector(const ResidualFn& fn, const Eigen::VectorXd& t_scaled,
                         const Eigen::VectorXd& d, const Eigen::VectorXd& y_pred,
                         const ContinuationConfig& cfg, Eigen::VectorXd& y, double& norm,
                         long long* solves) {
    const auto n = y_pred.size();
    y = y_pred;
    Eigen::VectorXd r;
    Eigen::MatrixXd J;
    Eigen::MatrixXd A(n, n);
    Eigen::VectorXd rhs(n);
    // The corrector starts on the hyperplane and every Newton step re-solves
    // the plane equation, so only the residual norm needs checking.
    Eigen::RowVectorXd plane = (t_scaled.array() * d.array().square()).matrix().transpose();
    plane /= plane.norm();
    for (int it = 0; it < cfg.max_corrector_iter; ++it) {
        try {
            fn(y, r, J);
        } catch (const SolverError&) {
            return -1;
        }
        if (!r.allFinite()) return -1;
        norm = r.lpNorm<Eigen::Infinity>();
        if (norm <= cfg.tol) return it;
        A.topRows(n - 1) = J;
        A.row(n - 1) = plane;
        rhs.head(n - 1) = -r;
        rhs[n - 1] = -plane.dot(y - y_pred);
        Eigen::VectorXd step = A.colPivHouseholderQr().solve(rhs);
        if (solves) ++(*solves);
        if (!step.allFinite()) return -1;
        y += step;
    }
    return -1;
}

}  // namespace

BranchPoint initial_point(const ResidualFn& fn, double lambda0, const Eigen::VectorXd& u_seed,
                          const ContinuationConfig& cfg, long long* newton_solves) {
    if (lambda0 < cfg.lambda_min - 1e-12 || lambda0 > cfg.lambda_max + 1e-12)
        throw std::invalid_argument("initial_point: lambda0 outside the continuation range");
    if (!u_seed.allFinite()) throw std::invalid_argument("initial_point: non-finite seed");

    const auto m = u_seed.size();
    Eigen::VectorXd y(m + 1);
    y.head(m) = u_seed;
    y[m] = lambda0;

    Eigen::VectorXd r;
    Eigen::MatrixXd J;
    fn(y, r, J);
    double norm = r.lpNorm<Eigen::Infinity>();
    for (int it = 0; it < 50 && norm > cfg.tol; ++it) {
        Eigen::VectorXd step = J.leftCols(m).colPivHouseholderQr().solve(-r);
        if (newton_solves) ++(*newton_solves);
        if (!step.allFinite()) break;
        double scale = 1.0;
        bool accepted = false;
        for (int h = 0; h < 9; ++h) {
            Eigen::VectorXd y_try = y;
            y_try.head(m) += scale * step;
            Eigen::VectorXd r_try;
            Eigen::MatrixXd J_try;
            try {
                fn(y_try, r_try, J_try);
            } catch (const SolverError&) {
                scale *= 0.5;
                continue;
            }
            const double norm_try = r_try.lpNorm<Eigen::Infinity>();
            if (std::isfinite(norm_try) && norm_try < norm) {
                y = y_try;
                r = std::move(r_try);
                J = std::move(J_try);
                norm = norm_try;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if (!accepted) break;
    }
    if (norm > cfg.tol) {
        std::ostringstream msg;
        msg << "initial_point: seed did not converge at lambda = " << lambda0
            << " (|r| = " << norm << "); try a different starting parameter";
        throw NonConvergence(msg.str(), y, norm);
    }
    return BranchPoint{y, norm, 0.0};
}

std::vector<BranchPoint> continue_branch(const ResidualFn& fn, const Eigen::VectorXd& y_start,
                                         const ContinuationConfig& cfg, BranchDiagnostics* diag) {
    if (!(cfg.ds_min > 0.0 && cfg.ds_min <= cfg.ds0 && cfg.ds0 <= cfg.ds_max))
        throw std::invalid_argument("continue_branch: need 0 < ds_min <= ds0 <= ds_max");

    BranchDiagnostics local;
    BranchDiagnostics& dg = diag ? *diag : local;

    const auto n = y_start.size();
    const auto m = n - 1;
    Eigen::VectorXd r;
    Eigen::MatrixXd J;
    fn(y_start, r, J);
    double norm = r.lpNorm<Eigen::Infinity>();
    if (norm > cfg.tol) throw SolverError("continue_branch: start point is not converged");

    std::vector<BranchPoint> branch;
    branch.push_back(BranchPoint{y_start, norm, 0.0});

    if (cfg.lambda_max - cfg.lambda_min <= 0.0) return branch;  // zero-length range

    Eigen::VectorXd d = metric_weights(y_start, cfg);
    Eigen::VectorXd t = tangent_vector(J, d);
    if (t[m] < 0.0) t = -t;  // first tangent: lambda increases
    double ds = cfg.ds0;

    Eigen::VectorXd y = y_start;
    while (static_cast<int>(branch.size()) < cfg.max_points) {
        const Eigen::VectorXd y_pred = y + ds * t;
        Eigen::VectorXd y_new;
        double norm_new = 0.0;
        const int iters =
            orthogonal_corrector(fn, t, d, y_pred, cfg, y_new, norm_new, &dg.corrector_solves);
        if (iters < 0) {
            ds *= cfg.shrink_factor;
            ++dg.rejected_steps;
            if (ds < cfg.ds_min) {
                dg.stalled = true;
                std::ostringstream msg;
                msg << "continuation stalled at lambda = " << y[m] << " after "
                    << branch.size() << " points (step size below ds_min)";
                dg.message = msg.str();
                break;
            }
            continue;
        }

        const double lam = y_new[m];
        if (lam > cfg.lambda_max + 1e-14 || lam < cfg.lambda_min - 1e-14) {
            // Clamp onto the boundary and finish.
            const double bound = lam > cfg.lambda_max ? cfg.lambda_max : cfg.lambda_min;
            try {
                BranchPoint end = initial_point(fn, bound, y_new.head(m), cfg, &dg.corrector_solves);
                end.arc = branch.back().arc +
                          (d.array() * (end.y - y).array()).matrix().norm();
                branch.push_back(end);
            } catch (const SolverError&) {
                // keep the branch as traced; the boundary point is cosmetic
            }
            dg.hit_lambda_boundary = true;
            break;
        }

        const double step_len = (d.array() * (y_new - y).array()).matrix().norm();
        const double arc = branch.back().arc + step_len;
        branch.push_back(BranchPoint{y_new, norm_new, arc});
        y = y_new;

        d = metric_weights(y, cfg);
        Eigen::VectorXd r_dummy;
        fn(y, r_dummy, J);
        Eigen::VectorXd t_new = tangent_vector(J, d);
        if ((d.array().square() * t_new.array() * t.array()).sum() < 0.0) t_new = -t_new;
        t = t_new;

        if (iters <= cfg.grow_iter_threshold) ds = std::min(ds * cfg.grow_factor, cfg.ds_max);
    }
    if (static_cast<int>(branch.size()) >= cfg.max_points) dg.hit_max_points = true;
    return branch;
}

}  // namespace vibratrak
