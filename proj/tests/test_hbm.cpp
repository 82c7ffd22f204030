#include <doctest.h>

#include <cmath>
#include <random>

#include "vibratrak/errors.hpp"
#include "vibratrak/hbm.hpp"

using namespace vibratrak;

TEST_CASE("dynamic stiffness blocks") {
    SUBCASE("undamped unit system at resonance") {
        const SystemConfig sys = SystemConfig::make(1.0, 0.0, 1.0, StiffeningDuffing{1.0}, 3, 1024);
        const Eigen::MatrixXd E = dynamic_stiffness_block(sys, 1.0, 1);
        CHECK(E.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    }
    SUBCASE("third harmonic at omega = 1/3 cancels the stiffness") {
        const SystemConfig sys = SystemConfig::make(1.0, 0.01, 1.0, StiffeningDuffing{1.0}, 3, 1024);
        const Eigen::MatrixXd E = dynamic_stiffness_block(sys, 1.0 / 3.0, 3);
        CHECK(E(0, 0) == doctest::Approx(0.0));
        CHECK(E(0, 1) == doctest::Approx(0.01));
        CHECK(E(1, 0) == doctest::Approx(-0.01));
        CHECK(E(1, 1) == doctest::Approx(0.0));
    }
    SUBCASE("static block") {
        const SystemConfig sys = SystemConfig::make(1.0, 0.01, 0.75, Jenkins{0.25, 0.2}, 3, 1024);
        const Eigen::MatrixXd E = dynamic_stiffness_block(sys, 0.7, 0);
        REQUIRE(E.rows() == 1);
        CHECK(E(0, 0) == doctest::Approx(0.75));
    }
}

TEST_CASE("hbm residual") {
    SUBCASE("linear solution solves the zero-nonlinearity system") {
        const SystemConfig sys = SystemConfig::make(1.0, 0.01, 1.0, StiffeningDuffing{0.0}, 3, 1024);
        for (double omega : {0.3, 0.8, 1.4}) {
            const HarmonicVector X = linear_frf(sys, omega, 2.0);
            const HbmResidual r = hbm_residual(sys, X, omega, 2.0);
            CHECK(r.R.lpNorm<Eigen::Infinity>() <= 1e-12);
        }
    }
    SUBCASE("trivial equilibrium for every force law") {
        for (const ForceModel force :
             {ForceModel{StiffeningDuffing{1.0}}, ForceModel{QuinticStiffness{1.0}},
              ForceModel{SofteningDuffing{-2.5e-4}}, ForceModel{SofteningII{0.25, 0.2, 0.0, 0.0}},
              ForceModel{UnilateralSpring{0.5}}, ForceModel{CubicDamping{0.03}},
              ForceModel{Jenkins{0.25, 0.2}}, ForceModel{Iwan{0.25, 0.2, -0.5, 0.0}}}) {
            const double klin = std::holds_alternative<StiffeningDuffing>(force) ||
                                        std::holds_alternative<QuinticStiffness>(force) ||
                                        std::holds_alternative<SofteningDuffing>(force) ||
                                        std::holds_alternative<CubicDamping>(force)
                                    ? 1.0
                                    : 0.75;
            const SystemConfig sys = SystemConfig::make(1.0, 0.01, klin, force, 3, 1024);
            const HbmResidual r = hbm_residual(sys, HarmonicVector::Zero(7), 0.5, 0.0);
            CHECK(r.R.lpNorm<Eigen::Infinity>() <= 1e-15);
        }
    }
    SUBCASE("converged solution re-verifies within solver tolerance") {
        const SystemConfig sys = SystemConfig::make(1.0, 0.01, 1.0, StiffeningDuffing{1.0}, 5, 1024);
        const HarmonicVector X = solve_hbm(sys, linear_frf(sys, 0.45, 1.0), 0.45, 1.0);
        CHECK(hbm_residual(sys, X, 0.45, 1.0).R.lpNorm<Eigen::Infinity>() <= 1e-9);
    }
    SUBCASE("derivative blocks match finite differences") {
        std::mt19937_64 rng(43);
        std::normal_distribution<double> gauss(0.0, 0.5);
        const SystemConfig sys = SystemConfig::make(1.0, 0.01, 1.0, StiffeningDuffing{1.0}, 3, 1024);
        HarmonicVector X(7);
        for (int i = 0; i < 7; ++i) X[i] = gauss(rng);
        const double omega = 0.62, F = 0.8, h = 1e-6;
        const HbmResidual r = hbm_residual(sys, X, omega, F);
        const HarmonicVector fdw =
            (hbm_residual(sys, X, omega + h, F).R - hbm_residual(sys, X, omega - h, F).R) / (2 * h);
        CHECK((fdw - r.dR_domega).norm() <= 1e-5 * std::max(fdw.norm(), 1e-8));
        const HarmonicVector fdF =
            (hbm_residual(sys, X, omega, F + h).R - hbm_residual(sys, X, omega, F - h).R) / (2 * h);
        CHECK((fdF - r.dR_dF).norm() <= 1e-5 * std::max(fdF.norm(), 1e-8));
        HarmonicVector d(7);
        for (int i = 0; i < 7; ++i) d[i] = gauss(rng);
        d.normalize();
        const HarmonicVector fdX =
            (hbm_residual(sys, X + h * d, omega, F).R - hbm_residual(sys, X - h * d, omega, F).R) /
            (2 * h);
        CHECK(((r.dR_dX * d) - fdX).norm() <= 1e-5 * std::max(fdX.norm(), 1e-8));
    }
}

TEST_CASE("solve_hbm") {
    SUBCASE("linear oracle at 40 frequencies") {
        const SystemConfig sys = SystemConfig::make(1.0, 0.01, 1.0, StiffeningDuffing{0.0}, 3, 1024);
        for (int i = 0; i < 40; ++i) {
            const double omega = 0.1 + 1.9 * i / 39.0;
            const HarmonicVector X =
                solve_hbm(sys, HarmonicVector::Zero(7), omega, 1.0, HbmOptions{1e-12, 50});
            const HarmonicVector ref = linear_frf(sys, omega, 1.0);
            const double amp = std::hypot(X[idx_cos(1)], X[idx_sin(1)]);
            const double a = sys.k_lin - sys.m * omega * omega;
            const double b = sys.c * omega;
            CHECK(amp == doctest::Approx(1.0 / std::hypot(a, b)).epsilon(1e-10));
            CHECK((X - ref).norm() <= 1e-10 * ref.norm());
        }
    }
    SUBCASE("Duffing below resonance converges quickly") {
        const SystemConfig sys = SystemConfig::make(1.0, 0.01, 1.0, StiffeningDuffing{1.0}, 5, 1024);
        const HarmonicVector X =
            solve_hbm(sys, linear_frf(sys, 0.2, 1.0), 0.2, 1.0, HbmOptions{1e-9, 10});
        CHECK(hbm_residual(sys, X, 0.2, 1.0).R.lpNorm<Eigen::Infinity>() <= 1e-9);
    }
    SUBCASE("NaN guess is rejected") {
        const SystemConfig sys = SystemConfig::make(1.0, 0.01, 1.0, StiffeningDuffing{1.0}, 3, 1024);
        HarmonicVector guess = HarmonicVector::Zero(7);
        guess[2] = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(solve_hbm(sys, guess, 0.5, 1.0), std::invalid_argument);
    }
    SUBCASE("non-convergence carries the best iterate") {
        const SystemConfig sys = SystemConfig::make(1.0, 0.01, 1.0, StiffeningDuffing{1.0}, 3, 1024);
        try {
            solve_hbm(sys, HarmonicVector::Zero(7), 0.9, 50.0, HbmOptions{1e-9, 2});
            FAIL("expected NonConvergence");
        } catch (const NonConvergence& e) {
            CHECK(e.best_iterate.size() == 7);
            CHECK(e.best_residual_norm > 0.0);
        }
    }
}
