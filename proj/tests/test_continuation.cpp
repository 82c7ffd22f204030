#include <doctest.h>

#include <cmath>

#include "vibratrak/continuation.hpp"
#include "vibratrak/errors.hpp"
#include "vibratrak/hbm.hpp"
#include "vibratrak/runner.hpp"

using namespace vibratrak;

namespace {

ResidualFn frc_residual(const SystemConfig& sys, double F) {
    return [&sys, F](const Eigen::VectorXd& y, Eigen::VectorXd& r, Eigen::MatrixXd& J) {
        const auto nc = y.size() - 1;
        const HbmResidual res = hbm_residual(sys, y.head(nc), y[nc], F);
        r = res.R;
        J.resize(nc, nc + 1);
        J.leftCols(nc) = res.dR_dX;
        J.col(nc) = res.dR_domega;
    };
}

}  // namespace

TEST_CASE("linear branch matches the closed-form FRF everywhere") {
    const SystemConfig sys = SystemConfig::make(1.0, 0.01, 1.0, StiffeningDuffing{0.0}, 3, 1024);
    const double F = 1.0;
    const ResidualFn fn = frc_residual(sys, F);
    ContinuationConfig cfg;
    cfg.lambda_min = 0.1;
    cfg.lambda_max = 2.0;
    const BranchPoint start = initial_point(fn, 0.1, linear_frf(sys, 0.1, F), cfg);
    BranchDiagnostics diag;
    const auto branch = continue_branch(fn, start.y, cfg, &diag);
    REQUIRE(branch.size() > 10);
    CHECK(diag.hit_lambda_boundary);
    CHECK(branch.back().lambda() == doctest::Approx(2.0));
    for (const auto& p : branch) {
        const HarmonicVector ref = linear_frf(sys, p.lambda(), F);
        CHECK((p.y.head(7) - ref).lpNorm<Eigen::Infinity>() <= 1e-9 * std::max(1.0, ref.norm()));
    }
}

TEST_CASE("branch points re-verify and arcs are monotone") {
    const SystemConfig sys = SystemConfig::make(1.0, 0.01, 1.0, StiffeningDuffing{1.0}, 5, 1024);
    const double F = 1.0;
    const ResidualFn fn = frc_residual(sys, F);
    ContinuationConfig cfg;
    cfg.lambda_min = 0.3;
    cfg.lambda_max = 0.7;
    cfg.ds0 = 0.005;
    cfg.ds_max = 0.02;
    cfg.max_points = 5000;
    const BranchPoint start = initial_point(fn, 0.3, robust_hbm_solve(sys, 0.3, F), cfg);
    const auto branch = continue_branch(fn, start.y, cfg);
    REQUIRE(branch.size() > 20);
    Eigen::VectorXd r;
    Eigen::MatrixXd J;
    for (size_t i = 0; i < branch.size(); ++i) {
        fn(branch[i].y, r, J);
        CHECK(r.lpNorm<Eigen::Infinity>() <= cfg.tol);
        if (i > 0) CHECK(branch[i].arc - branch[i - 1].arc >= cfg.ds_min / 2.0);
    }
}

TEST_CASE("Duffing FRC traverses the superharmonic folds") {
    const SystemConfig sys = SystemConfig::make(1.0, 0.01, 1.0, StiffeningDuffing{1.0}, 8, 1024);
    const double F = 1.0;
    const ResidualFn fn = frc_residual(sys, F);
    ContinuationConfig cfg;
    cfg.lambda_min = 0.4;
    cfg.lambda_max = 0.6;
    cfg.ds0 = 0.002;
    cfg.ds_max = 0.01;
    cfg.max_points = 20000;
    const BranchPoint start = initial_point(fn, 0.4, linear_frf(sys, 0.4, F), cfg);
    BranchDiagnostics diag;
    const auto branch = continue_branch(fn, start.y, cfg, &diag);
    CHECK(diag.hit_lambda_boundary);  // no mid-branch stall at the loop
    // frequency reverses direction through the 3:1 loop folds
    int direction_changes = 0;
    for (size_t i = 2; i < branch.size(); ++i) {
        const double d0 = branch[i - 1].lambda() - branch[i - 2].lambda();
        const double d1 = branch[i].lambda() - branch[i - 1].lambda();
        if (d0 * d1 < 0.0) ++direction_changes;
    }
    CHECK(direction_changes >= 2);
}

TEST_CASE("Duffing FRC traverses the primary-resonance fold") {
    const SystemConfig sys = SystemConfig::make(1.0, 0.01, 1.0, StiffeningDuffing{1.0}, 3, 1024);
    ContinuationConfig ccfg;
    ccfg.ds0 = 0.01;
    ccfg.ds_max = 0.05;
    ccfg.max_points = 40000;
    const FrcBranch br = compute_frc(sys, 1.0, 0.25, 4.0, ccfg, HbmOptions{});
    REQUIRE(br.points.size() > 50);
    CHECK(br.points.back().lambda() == doctest::Approx(4.0));  // no stall at the turning points
    int direction_changes = 0;
    for (size_t i = 2; i < br.points.size(); ++i) {
        const double d0 = br.points[i - 1].lambda() - br.points[i - 2].lambda();
        const double d1 = br.points[i].lambda() - br.points[i - 1].lambda();
        if (d0 * d1 < 0.0) ++direction_changes;
    }
    CHECK(direction_changes >= 2);
}

TEST_CASE("Jenkins FRC seeds from the linear prediction") {
    const SystemConfig sys = SystemConfig::make(1.0, 0.01, 0.75, Jenkins{0.25, 0.2}, 3, 1024);
    ContinuationConfig ccfg;
    ccfg.ds0 = 0.005;
    ccfg.ds_max = 0.02;
    const FrcBranch br = compute_frc(sys, 0.8, 0.2, 0.4, ccfg, HbmOptions{});
    REQUIRE(br.points.size() > 20);
    CHECK(br.points.front().lambda() == doctest::Approx(0.2));
    CHECK(br.points.back().lambda() == doctest::Approx(0.4));
}

TEST_CASE("zero-length parameter range returns the single start point") {
    const SystemConfig sys = SystemConfig::make(1.0, 0.01, 1.0, StiffeningDuffing{0.0}, 3, 1024);
    const ResidualFn fn = frc_residual(sys, 1.0);
    ContinuationConfig cfg;
    cfg.lambda_min = 0.5;
    cfg.lambda_max = 0.5;
    const BranchPoint start = initial_point(fn, 0.5, linear_frf(sys, 0.5, 1.0), cfg);
    const auto branch = continue_branch(fn, start.y, cfg);
    CHECK(branch.size() == 1);
}

TEST_CASE("initial_point contracts") {
    const SystemConfig sys = SystemConfig::make(1.0, 0.01, 1.0, StiffeningDuffing{0.0}, 3, 1024);
    const ResidualFn fn = frc_residual(sys, 1.0);
    ContinuationConfig cfg;
    cfg.lambda_min = 0.1;
    cfg.lambda_max = 2.0;

    SUBCASE("an already-converged seed is returned unchanged") {
        const HarmonicVector seed = linear_frf(sys, 0.5, 1.0);
        const BranchPoint p = initial_point(fn, 0.5, seed, cfg);
        CHECK((p.y.head(7) - seed).lpNorm<Eigen::Infinity>() == 0.0);
    }
    SUBCASE("lambda outside the range is rejected") {
        CHECK_THROWS_AS(initial_point(fn, 5.0, linear_frf(sys, 5.0, 1.0), cfg),
                        std::invalid_argument);
    }
    SUBCASE("a converged seed is required by continue_branch") {
        Eigen::VectorXd y(8);
        y.setConstant(0.3);
        CHECK_THROWS_AS(continue_branch(fn, y, cfg), SolverError);
    }
}
