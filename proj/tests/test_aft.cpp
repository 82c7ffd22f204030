#include <doctest.h>

#include <cmath>
#include <random>

#include "vibratrak/aft.hpp"
#include "vibratrak/errors.hpp"

using namespace vibratrak;

namespace {
HarmonicVector vec(std::initializer_list<double> v) {
    HarmonicVector x(static_cast<Eigen::Index>(v.size()));
    int i = 0;
    for (double e : v) x[i++] = e;
    return x;
}
}  // namespace

TEST_CASE("time series synthesis") {
    SUBCASE("pure cosine at Nt=4") {
        const TimeSeries ts = synthesize_time_series(vec({0, 1, 0}), 1.0, 4);
        CHECK(ts.x[0] == doctest::Approx(1.0));
        CHECK(ts.x[1] == doctest::Approx(0.0));
        CHECK(ts.x[2] == doctest::Approx(-1.0));
        CHECK(ts.x[3] == doctest::Approx(0.0));
    }
    SUBCASE("static term") {
        const TimeSeries ts = synthesize_time_series(vec({2, 0, 0}), 0.7, 8);
        for (int j = 0; j < 8; ++j) CHECK(ts.x[j] == doctest::Approx(2.0));
        for (int j = 0; j < 8; ++j) CHECK(ts.v[j] == doctest::Approx(0.0));
    }
    SUBCASE("pure sine at Nt=4") {
        const TimeSeries ts = synthesize_time_series(vec({0, 0, 1}), 1.0, 4);
        CHECK(ts.x[0] == doctest::Approx(0.0));
        CHECK(ts.x[1] == doctest::Approx(1.0));
        CHECK(ts.x[2] == doctest::Approx(0.0));
        CHECK(ts.x[3] == doctest::Approx(-1.0));
    }
    SUBCASE("velocity is the exact derivative") {
        const TimeSeries ts = synthesize_time_series(vec({0, 1, 0, 0, 0.5}), 2.0, 64);
        // x = cos(2t) + 0.5 sin(4t) -> v = -2 sin(2t) + 2 cos(4t) (omega = 2)
        for (int j = 0; j < 64; ++j) {
            const double t = 2.0 * M_PI * j / 64.0 / 2.0;
            CHECK(ts.v[j] == doctest::Approx(-2.0 * std::sin(2 * t) + 2.0 * std::cos(4 * t)));
        }
    }
    CHECK_THROWS_AS(synthesize_time_series(vec({0, 1, 0}), 1.0, 3), std::invalid_argument);
}

TEST_CASE("harmonic analysis") {
    const int Nt = 64;
    SUBCASE("orthonormality of a sampled cosine") {
        Eigen::VectorXd f(Nt);
        for (int j = 0; j < Nt; ++j) f[j] = std::cos(2.0 * M_PI * j / Nt);
        const HarmonicVector F = harmonic_coefficients(f, 3);
        CHECK(F[0] == doctest::Approx(0.0));
        CHECK(F[1] == doctest::Approx(1.0));
        for (int i = 2; i < 7; ++i) CHECK(F[i] == doctest::Approx(0.0));
    }
    SUBCASE("constant maps to the period mean") {
        const HarmonicVector F = harmonic_coefficients(Eigen::VectorXd::Constant(Nt, 3.0), 2);
        CHECK(F[0] == doctest::Approx(3.0));
        CHECK(F.tail(4).lpNorm<Eigen::Infinity>() == doctest::Approx(0.0));
    }
    SUBCASE("cube of a cosine: cos^3 = (3 cos + cos 3)/4") {
        Eigen::VectorXd f(Nt);
        for (int j = 0; j < Nt; ++j) f[j] = std::pow(std::cos(2.0 * M_PI * j / Nt), 3);
        const HarmonicVector F = harmonic_coefficients(f, 3);
        CHECK(F[idx_cos(1)] == doctest::Approx(0.75));
        CHECK(F[idx_cos(3)] == doctest::Approx(0.25));
    }
}

TEST_CASE("round trip synthesis/analysis") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int Nt : {32, 256, 1024}) {
        const int H = Nt / 4;
        HarmonicVector X(2 * std::min(H, 10) + 1);
        for (int i = 0; i < X.size(); ++i) X[i] = gauss(rng);
        const TimeSeries ts = synthesize_time_series(X, 1.3, Nt);
        const HarmonicVector back = harmonic_coefficients(ts.x, num_harmonics(X));
        CHECK((back - X).lpNorm<Eigen::Infinity>() <= 1e-12);
    }
}

TEST_CASE("aft on the reference laws") {
    SUBCASE("stiffening Duffing third harmonic") {
        HarmonicVector X = HarmonicVector::Zero(7);
        X[idx_cos(1)] = 1.0;
        const AftResult r = aft(StiffeningDuffing{1.0}, X, 0.77, 1024);
        CHECK(r.F[idx_cos(3)] == doctest::Approx(0.25));
        CHECK(r.F[idx_cos(1)] == doctest::Approx(0.75));
        CHECK(r.dF_domega.lpNorm<Eigen::Infinity>() == doctest::Approx(0.0));
    }
    SUBCASE("zero motion gives zero force for every law") {
        const HarmonicVector X = HarmonicVector::Zero(7);
        for (const ForceModel force :
             {ForceModel{StiffeningDuffing{1.0}}, ForceModel{QuinticStiffness{1.0}},
              ForceModel{SofteningDuffing{-2.5e-4}}, ForceModel{SofteningII{0.25, 0.2, 0.0, 0.0}},
              ForceModel{UnilateralSpring{0.5}}, ForceModel{CubicDamping{0.03}},
              ForceModel{Jenkins{0.25, 0.2}}, ForceModel{Iwan{0.25, 0.2, -0.5, 0.0}}}) {
            CHECK(aft(force, X, 0.5, 1024).F.lpNorm<Eigen::Infinity>() <= 1e-15);
        }
    }
    SUBCASE("cubic damping third harmonic sine at omega = 1/3") {
        HarmonicVector X = HarmonicVector::Zero(7);
        X[idx_cos(1)] = 1.0;
        const AftResult r = aft(CubicDamping{0.03}, X, 1.0 / 3.0, 1024);
        CHECK(r.F[idx_sin(3)] == doctest::Approx(2.7778e-4).epsilon(1e-4));
        CHECK(r.dF_domega.lpNorm<Eigen::Infinity>() > 0.0);  // velocity dependent
    }
    SUBCASE("non-finite input is reported with its sample index") {
        HarmonicVector X = HarmonicVector::Zero(7);
        X[0] = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(aft(StiffeningDuffing{1.0}, X, 1.0, 1024), SolverError);
    }
}

TEST_CASE("critical instants") {
    SUBCASE("single harmonic has exactly two reversals") {
        const TimeSeries ts = synthesize_time_series(vec({0, 1, 0}), 1.0, 1024);
        const auto crit = find_critical_instants(ts.x);
        REQUIRE(crit.size() == 2);
        CHECK(crit[0] == 0);
        CHECK(crit[1] == 512);
    }
    SUBCASE("multi-harmonic reversal count matches the velocity roots") {
        std::mt19937_64 rng(23);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (int rep = 0; rep < 20; ++rep) {
            HarmonicVector X(7);
            for (int i = 0; i < 7; ++i) X[i] = gauss(rng);
            const int Nt = 1024;
            const TimeSeries ts = synthesize_time_series(X, 1.0, Nt);
            // oracle: count sign changes of the exact velocity samples
            int roots = 0;
            for (int j = 0; j < Nt; ++j)
                if (ts.v[j] * ts.v[(j + 1) % Nt] < 0.0) ++roots;
            const auto crit = find_critical_instants(ts.x);
            CHECK(static_cast<int>(crit.size()) == roots);
            CHECK(crit.size() <= 2 * 3);
        }
    }
    SUBCASE("constant series has no reversals") {
        CHECK(find_critical_instants(Eigen::VectorXd::Constant(64, 1.5)).empty());
    }
}

TEST_CASE("fast hysteretic path equals the standard path") {
    std::mt19937_64 rng(29);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> logamp(-1.0, 1.7);

    SUBCASE("fully stuck Jenkins is linear") {
        HarmonicVector X = HarmonicVector::Zero(7);
        X[idx_cos(1)] = 0.3;  // below F_s/k_t = 0.8 slip displacement
        const AftResult r = aft_fast_hysteretic(Jenkins{0.25, 0.2}, X, 1.0, 1024);
        CHECK(r.F[idx_cos(1)] == doctest::Approx(0.25 * 0.3));
        HarmonicVector other = r.F;
        other[idx_cos(1)] = 0.0;
        CHECK(other.lpNorm<Eigen::Infinity>() <= 1e-14);
    }

    SUBCASE("randomized equivalence with instrumentation") {
        const int H = 3, Nt = 1024;
        for (const ForceModel force :
             {ForceModel{Jenkins{0.25, 0.2}}, ForceModel{Iwan{0.25, 0.2, -0.5, 0.0}}}) {
            for (int rep = 0; rep < 100; ++rep) {
                HarmonicVector X(2 * H + 1);
                for (int i = 0; i < X.size(); ++i) X[i] = gauss(rng);
                X *= std::pow(10.0, logamp(rng));
                AftStats stats;
                const AftResult fast = aft_fast_hysteretic(force, X, 1.0, Nt, true, &stats);
                const AftResult ref = aft(force, X, 1.0, Nt, true);
                CHECK((fast.F - ref.F).lpNorm<Eigen::Infinity>() <= 1e-12);
                CHECK((fast.dF_dX - ref.dF_dX).lpNorm<Eigen::Infinity>() <= 1e-12);
                if (!stats.fell_back_to_standard) {
                    CHECK(stats.critical_path_evals <= 2 * (2 * H) + 1);
                    CHECK(stats.element_evals <= 2 * stats.reversal_count + Nt);
                }
            }
        }
    }

    SUBCASE("rejects non-hysteretic models") {
        CHECK_THROWS_AS(aft_fast_hysteretic(StiffeningDuffing{1.0}, vec({0, 1, 0}), 1.0, 64),
                        std::invalid_argument);
    }
}

TEST_CASE("oddness propagation through the transform") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (const ForceModel force :
         {ForceModel{StiffeningDuffing{1.0}}, ForceModel{QuinticStiffness{1.0}},
          ForceModel{CubicDamping{0.03}}, ForceModel{SofteningII{0.25, 0.2, 0.0, 0.0}}}) {
        HarmonicVector X = HarmonicVector::Zero(11);
        X[idx_cos(1)] = gauss(rng);
        X[idx_sin(1)] = gauss(rng);
        X[idx_cos(3)] = 0.4 * gauss(rng);
        X[idx_sin(5)] = 0.2 * gauss(rng);
        const AftResult r = aft(force, X, 0.9, 1024);
        CHECK(std::abs(r.F[0]) <= 1e-12);
        for (int k = 2; k <= 4; k += 2) {
            CHECK(std::abs(r.F[idx_cos(k)]) <= 1e-12);
            CHECK(std::abs(r.F[idx_sin(k)]) <= 1e-12);
        }
    }
}

TEST_CASE("conservative laws do no net work over a cycle") {
    std::mt19937_64 rng(37);
    std::normal_distribution<double> gauss(0.0, 0.8);
    struct Case {
        ForceModel force;
        int Nt;
    };
    // finer sampling for the laws with limited smoothness
    const std::vector<Case> cases{{StiffeningDuffing{1.0}, 1024},
                                  {QuinticStiffness{1.0}, 1024},
                                  {SofteningDuffing{-2.5e-4}, 1024},
                                  {SofteningII{0.25, 0.2, 0.0, 0.0}, 1 << 16},
                                  {UnilateralSpring{0.5}, 1 << 20}};
    for (const auto& c : cases) {
        for (int rep = 0; rep < 3; ++rep) {
            HarmonicVector X(7);
            for (int i = 0; i < 7; ++i) X[i] = gauss(rng);
            const AftResult r = aft(c.force, X, 1.0, c.Nt, false);
            double work = 0.0;
            for (int n = 1; n <= 3; ++n)
                work += n * (r.F[idx_cos(n)] * X[idx_sin(n)] - r.F[idx_sin(n)] * X[idx_cos(n)]);
            CHECK(std::abs(work) <= 1e-10);
        }
    }
}

TEST_CASE("aft jacobian matches finite differences") {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> gauss(0.0, 0.6);
    for (const ForceModel force :
         {ForceModel{StiffeningDuffing{1.0}}, ForceModel{CubicDamping{0.03}},
          ForceModel{SofteningII{0.25, 0.2, 0.0, 0.0}}}) {
        HarmonicVector X(7);
        for (int i = 0; i < 7; ++i) X[i] = gauss(rng);
        const double omega = 0.41;
        const AftResult r = aft(force, X, omega, 1024);
        HarmonicVector d(7);
        for (int i = 0; i < 7; ++i) d[i] = gauss(rng);
        d.normalize();
        const double h = 1e-6;
        const HarmonicVector fd =
            (aft(force, X + h * d, omega, 1024, false).F - aft(force, X - h * d, omega, 1024, false).F) /
            (2 * h);
        CHECK(((r.dF_dX * d) - fd).norm() <= 1e-5 * std::max(fd.norm(), 1e-8));
    }
}
