#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace vibratrak {

/// Residual supplier for one-parameter branches. y = (u, lambda) packs the m
/// unknowns and the continuation parameter last; J is the m x (m+1) Jacobian
/// with respect to all of y.
using ResidualFn = std::function<void(const Eigen::VectorXd& y, Eigen::VectorXd& r, Eigen::MatrixXd& J)>;

struct ContinuationConfig {
    double ds0 = 0.01;
    double ds_min = 1e-7;
    double ds_max = 0.05;
    double lambda_min = 0.0;
    double lambda_max = 1.0;
    int max_points = 5000;
    double tol = 1e-9;           // corrector residual infinity norm
    int max_corrector_iter = 10;
    double grow_factor = 2.0;    // applied after quick corrector convergence
    double shrink_factor = 0.25; // applied on corrector failure
    int grow_iter_threshold = 3;
    // Variable-scaling weights for the arclength metric. Zero means adaptive:
    // unknown block weighted by 1/max(|u|, eps), parameter by 1/max(|lambda|, floor).
    double weight_u = 0.0;
    double weight_lambda = 0.0;
    double scale_floor = 1e-8;
};

struct BranchPoint {
    Eigen::VectorXd y;     // unknowns with the parameter appended
    double residual_norm = 0.0;
    double arc = 0.0;      // accumulated arclength in the scaled metric
    double lambda() const { return y[y.size() - 1]; }
};

struct BranchDiagnostics {
    bool stalled = false;
    bool hit_lambda_boundary = false;
    bool hit_max_points = false;
    std::string message;
    long long corrector_solves = 0;  // Newton iterations spent (all correctors and boundary solves)
    int rejected_steps = 0;
};

/// Trace a branch from a converged start point until the parameter leaves
/// [lambda_min, lambda_max], max_points is reached, or the step size cannot be
/// reduced further (truncated branch, stall diagnostic). The first tangent is
/// oriented so lambda initially increases; subsequent tangents keep a positive
/// inner product with their predecessor.
std::vector<BranchPoint> continue_branch(const ResidualFn& fn, const Eigen::VectorXd& y_start,
                                         const ContinuationConfig& cfg,
                                         BranchDiagnostics* diag = nullptr);

/// Converge a seed at fixed parameter lambda0 by damped Newton from u_seed.
BranchPoint initial_point(const ResidualFn& fn, double lambda0, const Eigen::VectorXd& u_seed,
                          const ContinuationConfig& cfg, long long* newton_solves = nullptr);

}  // namespace vibratrak
