#include "vibratrak/validate.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "vibratrak/aft.hpp"
#include "vibratrak/analysis.hpp"
#include "vibratrak/errors.hpp"
#include "vibratrak/hbm.hpp"
#include "vibratrak/model.hpp"
#include "vibratrak/runner.hpp"
#include "vibratrak/vprnm.hpp"

namespace vibratrak {

namespace {

constexpr unsigned kSeed = 20240515u;

HarmonicVector random_X(std::mt19937_64& rng, int H, double scale) {
    std::normal_distribution<double> gauss(0.0, scale);
    HarmonicVector X(2 * H + 1);
    for (int i = 0; i < X.size(); ++i) X[i] = gauss(rng);
    return X;
}

/// The eight force laws at their reference parameterizations.
std::vector<ForceModel> all_models() {
    return {StiffeningDuffing{1.0},
            QuinticStiffness{1.0},
            SofteningDuffing{-2.5e-4},
            SofteningII{0.25, 0.2, 0.0, 0.0},
            UnilateralSpring{0.5},
            CubicDamping{0.03},
            Jenkins{0.25, 0.2},
            Iwan{0.25, 0.2, -0.5, 0.0, 100}};
}

SystemConfig system_for(const ForceModel& force, int H = 3, int Nt = 1024) {
    const double k = is_hysteretic(force) || std::holds_alternative<SofteningII>(force) ||
                             std::holds_alternative<UnilateralSpring>(force)
                         ? 0.75
                         : 1.0;
    return SystemConfig::make(1.0, 0.01, k, force, H, Nt);
}

struct Suite {
    std::vector<CheckResult> results;
    std::function<void(const CheckResult&)> on_result;

    void add(const std::string& name, double measure, double limit, const std::string& detail = "") {
        CheckResult r{name, measure <= limit, measure, limit, detail};
        results.push_back(r);
        if (on_result) on_result(r);
    }
    void add_bool(const std::string& name, bool pass, const std::string& detail = "") {
        CheckResult r{name, pass, pass ? 0.0 : 1.0, 0.5, detail};
        results.push_back(r);
        if (on_result) on_result(r);
    }
};

void check_round_trip(Suite& s) {
    std::mt19937_64 rng(kSeed);
    double worst = 0.0;
    for (int Nt : {64, 256, 1024}) {
        for (int rep = 0; rep < 20; ++rep) {
            const int H = 1 + static_cast<int>(rng() % std::min(12, Nt / 4));
            const HarmonicVector X = random_X(rng, H, 1.0);
            const TimeSeries ts = synthesize_time_series(X, 1.0, Nt);
            const HarmonicVector back = harmonic_coefficients(ts.x, num_harmonics(X));
            worst = std::max(worst, (back - X).lpNorm<Eigen::Infinity>());
        }
    }
    s.add("transform_round_trip", worst, 1e-12);
}

void check_conservative_work(Suite& s) {
    std::mt19937_64 rng(kSeed + 1);
    double worst = 0.0;
    std::string worst_model;
    for (const auto& force : all_models()) {
        if (is_dissipative(force)) continue;
        // The nonsmooth laws need finer sampling for the aliasing error of the
        // discrete transform to drop below the contract.
        int Nt = 1024;
        if (std::holds_alternative<SofteningII>(force)) Nt = 1 << 16;
        if (std::holds_alternative<UnilateralSpring>(force)) Nt = 1 << 20;
        for (int rep = 0; rep < 5; ++rep) {
            const int H = 3;
            const HarmonicVector X = random_X(rng, H, 0.8);
            const AftResult res = aft(force, X, 1.0, Nt, /*jacobian=*/false);
            double work = 0.0;
            for (int n = 1; n <= H; ++n)
                work += n * (res.F[idx_cos(n)] * X[idx_sin(n)] - res.F[idx_sin(n)] * X[idx_cos(n)]);
            if (std::abs(work) > worst) {
                worst = std::abs(work);
                worst_model = force_kind_name(force);
            }
        }
    }
    s.add("conservative_zero_work", worst, 1e-10, "worst: " + worst_model);
}

void check_oddness(Suite& s) {
    std::mt19937_64 rng(kSeed + 2);
    std::uniform_real_distribution<double> uni(-3.0, 3.0);
    double worst = 0.0;
    for (const auto& force : all_models()) {
        if (is_hysteretic(force) || !is_odd(force)) continue;
        for (int rep = 0; rep < 50; ++rep) {
            const double x = uni(rng), v = uni(rng);
            const double fp = eval_instantaneous(force, x, v).f;
            const double fm = eval_instantaneous(force, -x, -v).f;
            worst = std::max(worst, std::abs(fp + fm));
        }
    }
    s.add("pointwise_oddness", worst, 0.0);
    const double u1 = eval_instantaneous(UnilateralSpring{0.5}, 1.0, 0.0).f;
    const double u2 = eval_instantaneous(UnilateralSpring{0.5}, -1.0, 0.0).f;
    s.add_bool("unilateral_violates_oddness", u1 + u2 != 0.0);
}

void check_oddness_propagation(Suite& s) {
    std::mt19937_64 rng(kSeed + 3);
    double worst = 0.0;
    const int H = 5, Nt = 1024;
    for (const auto& force : all_models()) {
        if (!is_odd(force)) continue;
        for (int rep = 0; rep < 10; ++rep) {
            HarmonicVector X = HarmonicVector::Zero(2 * H + 1);
            std::normal_distribution<double> gauss(0.0, 1.0);
            for (int k = 1; k <= H; k += 2) {
                X[idx_cos(k)] = gauss(rng);
                X[idx_sin(k)] = gauss(rng);
            }
            // For hysteretic elements every slider must slip so the steady
            // loop forgets the (asymmetric) starting state.
            if (is_hysteretic(force)) X *= 6.0 / std::max(X.norm(), 1e-9);
            const AftResult res = aft(force, X, 1.0, Nt, /*jacobian=*/false);
            double even = std::abs(res.F[0]);
            for (int k = 2; k <= H; k += 2)
                even = std::max({even, std::abs(res.F[idx_cos(k)]), std::abs(res.F[idx_sin(k)])});
            worst = std::max(worst, even);
        }
    }
    s.add("oddness_propagation", worst, 1e-12);
}

void check_saturation(Suite& s) {
    std::mt19937_64 rng(kSeed + 4);
    std::normal_distribution<double> gauss(0.0, 1.5);
    double worst = 0.0;  // excess over the element's saturation value
    for (const auto& force : all_models()) {
        if (!is_hysteretic(force)) continue;
        // the discretized Iwan saturates at the quadrature value of F_s
        const double sat = std::holds_alternative<Jenkins>(force) ? 0.2 : 0.2 * (1.0 + 2e-4);
        HystereticState state = initial_state(force, 0.0);
        double x = 0.0;
        for (int step = 0; step < 2000; ++step) {
            x += gauss(rng);
            const HystStep r = eval_hysteretic_step(force, x, state);
            worst = std::max(worst, std::abs(r.f) - sat);
        }
    }
    s.add("hysteretic_saturation", worst, 1e-12);
    // softening II saturates too
    const SofteningII soft{0.25, 0.2, 0.0, 0.0};
    double w2 = 0.0;
    for (double x = -40.0; x <= 40.0; x += 0.37)
        w2 = std::max(w2, std::abs(eval_instantaneous(ForceModel{soft}, x, 0.0).f) - soft.F_s);
    s.add("softening_ii_saturation", w2, 1e-12);
}

void check_masing_closure(Suite& s) {
    std::mt19937_64 rng(kSeed + 5);
    double worst = 0.0;
    const int Nt = 512;
    for (const auto& force : all_models()) {
        if (!is_hysteretic(force)) continue;
        for (int rep = 0; rep < 5; ++rep) {
            const HarmonicVector X = random_X(rng, 3, 1.0);
            const TimeSeries ts = synthesize_time_series(X, 1.0, Nt);
            HystereticState state = initial_state(force, ts.x[0]);
            Eigen::VectorXd cycle2(Nt), cycle3(Nt);
            for (int cycle = 0; cycle < 3; ++cycle) {
                for (int j = 0; j < Nt; ++j) {
                    const double f = eval_hysteretic_step(force, ts.x[j], state).f;
                    if (cycle == 1) cycle2[j] = f;
                    if (cycle == 2) cycle3[j] = f;
                }
            }
            worst = std::max(worst, (cycle2 - cycle3).lpNorm<Eigen::Infinity>());
        }
    }
    s.add("masing_closure", worst, 1e-12);
}

void check_iwan_backbone(Suite& s) {
    // Monotonic first loading of the discretized element against the closed
    // softening-II form with the same parameters.
    const Iwan iw{0.25, 0.2, -0.5, 0.0, 100};
    const SofteningII closed{iw.k_t, iw.F_s, iw.chi, iw.beta};
    const double pm = phi_max(iw.F_s, iw.k_t, iw.chi, iw.beta);
    double worst = 0.0;
    HystereticState state = initial_state(ForceModel{iw}, 0.0);
    // below ~2 slider spacings the discretized element is exactly linear
    // while the continuum curve already bends, so compare beyond that
    for (int i = 1; i <= 60; ++i) {
        const double x = pm * (0.1 + 0.9 * i / 60.0);
        const double f = eval_hysteretic_step(ForceModel{iw}, x, state).f;
        const double ref = eval_instantaneous(ForceModel{closed}, x, 0.0).f;
        worst = std::max(worst, std::abs(f - ref) / std::abs(ref));
    }
    s.add("iwan_backbone_quadrature", worst, 1e-3);
}

void check_aft_jacobians(Suite& s) {
    std::mt19937_64 rng(kSeed + 6);
    const int H = 3, Nt = 1024;
    double worst_smooth = 0.0;
    for (const auto& force : all_models()) {
        if (is_hysteretic(force)) continue;
        for (int rep = 0; rep < 8; ++rep) {
            const HarmonicVector X = random_X(rng, H, 0.7);
            const double omega = 0.3 + 0.2 * (rep % 3);
            const AftResult res = aft(force, X, omega, Nt);
            const HarmonicVector d = random_X(rng, H, 1.0).normalized();
            const double h = 1e-6;
            const HarmonicVector fd =
                (aft(force, X + h * d, omega, Nt, false).F - aft(force, X - h * d, omega, Nt, false).F) /
                (2.0 * h);
            const HarmonicVector an = res.dF_dX * d;
            const double scale = std::max(fd.norm(), 1e-10);
            worst_smooth = std::max(worst_smooth, (fd - an).norm() / scale);
            // frequency derivative
            const double hw = 1e-6;
            const HarmonicVector fdw =
                (aft(force, X, omega + hw, Nt, false).F - aft(force, X, omega - hw, Nt, false).F) /
                (2.0 * hw);
            const double sw = std::max(fdw.norm(), 1e-8);
            worst_smooth = std::max(worst_smooth, (fdw - res.dF_domega).norm() / sw);
        }
    }
    s.add("aft_jacobian_fd_smooth", worst_smooth, 1e-5);

    // Piecewise-linear hysteretic laws: finite differences are exact unless
    // the perturbation crosses a stick/slip transition, so a small fraction
    // of draws is allowed to land on a crossing.
    int ok = 0, total = 0;
    for (const auto& force : all_models()) {
        if (!is_hysteretic(force)) continue;
        for (int rep = 0; rep < 25; ++rep) {
            const HarmonicVector X = random_X(rng, H, 0.9);
            const AftResult res = aft(force, X, 1.0, Nt);
            const HarmonicVector d = random_X(rng, H, 1.0).normalized();
            const double h = 1e-7;
            const HarmonicVector fd =
                (aft(force, X + h * d, 1.0, Nt, false).F - aft(force, X - h * d, 1.0, Nt, false).F) /
                (2.0 * h);
            const HarmonicVector an = res.dF_dX * d;
            const double scale = std::max(fd.norm(), 1e-10);
            ++total;
            if ((fd - an).norm() / scale <= 1e-5) ++ok;
        }
    }
    std::ostringstream det;
    det << ok << "/" << total << " transition-free directions agree";
    s.add("aft_jacobian_fd_hysteretic", total - ok, 0.1 * total, det.str());
}

void check_fast_aft(Suite& s) {
    std::mt19937_64 rng(kSeed + 7);
    std::uniform_real_distribution<double> amp(-1.5, 2.0);
    const int H = 3, Nt = 1024;
    double worst_F = 0.0, worst_J = 0.0;
    long long worst_path = 0;
    bool bounds_ok = true;
    for (const auto& force : {ForceModel{Jenkins{0.25, 0.2}}, ForceModel{Iwan{0.25, 0.2, -0.5, 0.0, 100}}}) {
        for (int rep = 0; rep < 100; ++rep) {
            const HarmonicVector X = random_X(rng, H, std::pow(10.0, amp(rng)));
            AftStats stats;
            const AftResult fast = aft_fast_hysteretic(force, X, 1.0, Nt, true, &stats);
            const AftResult ref = aft(force, X, 1.0, Nt, true);
            worst_F = std::max(worst_F, (fast.F - ref.F).lpNorm<Eigen::Infinity>());
            worst_J = std::max(worst_J,
                               (fast.dF_dX - ref.dF_dX).lpNorm<Eigen::Infinity>());
            if (!stats.fell_back_to_standard) {
                worst_path = std::max(worst_path, stats.critical_path_evals);
                if (stats.element_evals > 2 * stats.reversal_count + Nt) bounds_ok = false;
            }
        }
    }
    s.add("fast_aft_equivalence_F", worst_F, 1e-12);
    s.add("fast_aft_equivalence_dFdX", worst_J, 1e-12);
    s.add("fast_aft_critical_path", static_cast<double>(worst_path), 2.0 * (2 * H) + 1);
    s.add_bool("fast_aft_element_count_bound", bounds_ok);
}

void check_decomposition(Suite& s) {
    std::mt19937_64 rng(kSeed + 8);
    double worst = 0.0;
    for (const auto& force : all_models()) {
        const SystemConfig sys = system_for(force, 5);
        for (int rep = 0; rep < 100; ++rep) {
            const HarmonicVector X = random_X(rng, sys.H, 0.9);
            const int n = 2 + static_cast<int>(rng() % 3);
            worst = std::max(worst, decomposition_check(sys, X, 0.31, n));
        }
    }
    s.add("decomposition_identity", worst, 1e-10);
}

void check_linear_limit(Suite& s) {
    const SystemConfig sys = SystemConfig::make(1.0, 0.01, 1.0, StiffeningDuffing{0.0}, 5, 1024);
    double worst = 0.0;
    for (int i = 0; i < 40; ++i) {
        const double omega = 0.1 + 1.9 * i / 39.0;
        const HarmonicVector X = solve_hbm(sys, HarmonicVector::Zero(2 * sys.H + 1), omega, 1.0,
                                           HbmOptions{1e-12, 50});
        const HarmonicVector ref = linear_frf(sys, omega, 1.0);
        worst = std::max(worst, (X - ref).norm() / ref.norm());
    }
    s.add("linear_frf_exactness", worst, 1e-10);
}

void check_hbm_residual_fd(Suite& s) {
    std::mt19937_64 rng(kSeed + 9);
    const SystemConfig sys = SystemConfig::make(1.0, 0.01, 1.0, StiffeningDuffing{1.0}, 3, 1024);
    double worst = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
        const HarmonicVector X = random_X(rng, sys.H, 0.5);
        const double omega = 0.4 + 0.05 * rep, F = 0.7;
        const HbmResidual r = hbm_residual(sys, X, omega, F);
        const double h = 1e-6;
        const HarmonicVector fdw =
            (hbm_residual(sys, X, omega + h, F).R - hbm_residual(sys, X, omega - h, F).R) / (2 * h);
        worst = std::max(worst, (fdw - r.dR_domega).norm() / std::max(fdw.norm(), 1e-8));
        const HarmonicVector fdF =
            (hbm_residual(sys, X, omega, F + h).R - hbm_residual(sys, X, omega, F - h).R) / (2 * h);
        worst = std::max(worst, (fdF - r.dR_dF).norm() / std::max(fdF.norm(), 1e-8));
    }
    s.add("hbm_residual_fd", worst, 1e-5);
}

void check_continuation_basics(Suite& s) {
    // Linear FRF traced as a branch must match the closed form everywhere.
    const SystemConfig sys = SystemConfig::make(1.0, 0.01, 1.0, StiffeningDuffing{0.0}, 3, 1024);
    const double F = 1.0;
    ResidualFn fn = [&](const Eigen::VectorXd& y, Eigen::VectorXd& r, Eigen::MatrixXd& J) {
        const int nc = 2 * sys.H + 1;
        const HbmResidual res = hbm_residual(sys, y.head(nc), y[nc], F);
        r = res.R;
        J.resize(nc, nc + 1);
        J.leftCols(nc) = res.dR_dX;
        J.col(nc) = res.dR_domega;
    };
    ContinuationConfig cfg;
    cfg.lambda_min = 0.1;
    cfg.lambda_max = 2.0;
    cfg.ds0 = 0.01;
    cfg.ds_max = 0.05;
    const BranchPoint start = initial_point(fn, 0.1, linear_frf(sys, 0.1, F), cfg);
    BranchDiagnostics diag;
    const auto branch = continue_branch(fn, start.y, cfg, &diag);
    double worst = 0.0;
    double min_sep = 1e300;
    for (size_t i = 0; i < branch.size(); ++i) {
        const double omega = branch[i].lambda();
        const HarmonicVector ref = linear_frf(sys, omega, F);
        worst = std::max(worst,
                         (branch[i].y.head(2 * sys.H + 1) - ref).lpNorm<Eigen::Infinity>() /
                             std::max(ref.norm(), 1e-12));
        if (i > 0) min_sep = std::min(min_sep, branch[i].arc - branch[i - 1].arc);
    }
    s.add("continuation_linear_branch", worst, 1e-9);
    s.add_bool("continuation_reaches_boundary", diag.hit_lambda_boundary);
    s.add("continuation_arc_separation", cfg.ds_min / 2.0 - min_sep, 0.0);
}

void check_step_size_convergence(Suite& s) {
    const SystemConfig sys = SystemConfig::make(1.0, 0.01, 1.0, StiffeningDuffing{1.0}, 3, 1024);
    const double F = 0.3;
    ResidualFn fn = [&](const Eigen::VectorXd& y, Eigen::VectorXd& r, Eigen::MatrixXd& J) {
        const int nc = 2 * sys.H + 1;
        const HbmResidual res = hbm_residual(sys, y.head(nc), y[nc], F);
        r = res.R;
        J.resize(nc, nc + 1);
        J.leftCols(nc) = res.dR_dX;
        J.col(nc) = res.dR_domega;
    };
    auto trace = [&](double ds_max) {
        ContinuationConfig cfg;
        cfg.lambda_min = 0.5;
        cfg.lambda_max = 0.95;
        cfg.ds0 = ds_max / 4.0;
        cfg.ds_min = 1e-9;
        cfg.ds_max = ds_max;
        cfg.max_points = 20000;
        const BranchPoint start = initial_point(fn, 0.5, linear_frf(sys, 0.5, F), cfg);
        return continue_branch(fn, start.y, cfg);
    };
    const auto coarse = trace(0.05);
    const auto fine = trace(0.005);
    // compare amplitude of harmonic 1 interpolated at shared frequencies
    auto amp_at = [&](const std::vector<BranchPoint>& br, double omega) {
        for (size_t j = 0; j + 1 < br.size(); ++j) {
            const double w0 = br[j].lambda(), w1 = br[j + 1].lambda();
            if ((w0 - omega) * (w1 - omega) > 0.0) continue;
            const double u = w1 != w0 ? (omega - w0) / (w1 - w0) : 0.0;
            const Eigen::VectorXd y = (1.0 - u) * br[j].y + u * br[j + 1].y;
            return std::hypot(y[idx_cos(1)], y[idx_sin(1)]);
        }
        return -1.0;
    };
    double worst = 0.0;
    for (double omega = 0.55; omega <= 0.9; omega += 0.05) {
        const double a = amp_at(coarse, omega), b = amp_at(fine, omega);
        if (a > 0.0 && b > 0.0) worst = std::max(worst, std::abs(a - b) / b);
    }
    s.add("continuation_step_convergence", worst, 1e-3);
}

void check_vprnm_contracts(Suite& s) {
    // Small stiffening Duffing 3:1 backbone: orthogonality, HBM membership,
    // decomposition, and the low-force phase limit.
    const SystemConfig sys = SystemConfig::make(1.0, 0.01, 1.0, StiffeningDuffing{1.0}, 3, 1024);
    VprnmOptions opts;
    opts.continuation.ds0 = 0.02;
    opts.continuation.ds_max = 0.1;
    opts.continuation.max_points = 400;
    const auto backbone = vprnm_backbone(sys, 3, 0.05, 3.0, opts);
    if (backbone.size() < 5) {
        s.add_bool("vprnm_backbone_traced", false, "too few points");
        return;
    }
    s.add_bool("vprnm_backbone_traced", true);
    double worst_orth = 0.0, worst_member = 0.0, worst_decomp = 0.0;
    for (size_t i = 0; i < backbone.size(); i += std::max<size_t>(1, backbone.size() / 25)) {
        const auto& p = backbone[i];
        worst_orth = std::max(worst_orth, std::abs(p.constraint_residual));
        const HarmonicVector re = solve_hbm(sys, p.X, p.omega, p.F);
        worst_member =
            std::max(worst_member, (re - p.X).lpNorm<Eigen::Infinity>() / std::max(p.X.norm(), 1e-12));
        worst_decomp = std::max(worst_decomp, decomposition_check(sys, p.X, p.omega, 3));
    }
    s.add("vprnm_orthogonality", worst_orth, 1e-9);
    s.add("vprnm_hbm_membership", worst_member, 1e-8);
    s.add("vprnm_decomposition_on_backbone", worst_decomp, 1e-10);
    s.add("vprnm_duffing_low_force_phase", std::abs(backbone.front().phi_n - (-M_PI / 2.0)), 0.05);

    const SystemConfig soft = SystemConfig::make(1.0, 0.01, 1.0, SofteningDuffing{-2.5e-4}, 3, 1024);
    const auto soft_bb = vprnm_backbone(soft, 3, 0.5, 4.0, opts);
    s.add("vprnm_softening_low_force_phase",
          soft_bb.empty() ? 1.0 : std::abs(soft_bb.front().phi_n - M_PI / 2.0), 0.05);

    const SystemConfig cd = SystemConfig::make(1.0, 0.01, 1.0, CubicDamping{0.03}, 3, 1024);
    const auto cd_bb = vprnm_backbone(cd, 3, 0.2, 2.0, opts);
    s.add("vprnm_cubic_damping_low_force_phase",
          cd_bb.empty() ? 1.0 : std::abs(cd_bb.front().phi_n), 0.05);
}

void check_peak_refinement(Suite& s) {
    // halving the continuation step must not move the located 3:1 peak
    const SystemConfig sys = SystemConfig::make(1.0, 0.01, 1.0, StiffeningDuffing{1.0}, 8, 1024);
    auto peak_omega = [&](double ds_max) {
        ContinuationConfig cfg;
        cfg.ds0 = ds_max / 4.0;
        cfg.ds_max = ds_max;
        cfg.max_points = 20000;
        const FrcBranch br = compute_frc(sys, 1.0, 0.4, 0.6, cfg, HbmOptions{});
        const auto peaks = extract_superharmonic_peaks(sys, br, 3);
        double best_amp = -1.0, best_om = 0.0;
        for (const auto& p : peaks)
            if (p.Xn_peak > best_amp) {
                best_amp = p.Xn_peak;
                best_om = p.omega_peak;
            }
        return best_om;
    };
    const double om_coarse = peak_omega(0.02);
    const double om_fine = peak_omega(0.01);
    s.add("peak_refinement_step_halving",
          om_fine > 0.0 ? std::abs(om_coarse - om_fine) / om_fine : 1.0, 2e-3);
}

void check_saturating_excitation(Suite& s) {
    // Plateau of the broadband excitation for the saturating laws, measured
    // relative to the linearized-spring force (the raw magnitudes creep
    // toward the square-wave limit; Jenkins gains exactly 10% over this
    // decade), against cubic growth for the stiffening Duffing law.
    double worst = 0.0, worst_raw = 0.0;
    for (const auto& force : {ForceModel{SofteningII{0.25, 0.2, 0.0, 0.0}},
                              ForceModel{Jenkins{0.25, 0.2}}, ForceModel{Iwan{0.25, 0.2, -0.5, 0.0}}}) {
        const SystemConfig sys = system_for(force, 5);
        const auto sweep = apriori_sweep(sys, 3, {10.0, 100.0}, 1.0 / 3.0);
        worst = std::max(worst, (sweep[1].magnitude / sweep[1].X1) /
                                    (sweep[0].magnitude / sweep[0].X1));
        worst_raw = std::max(worst_raw, sweep[1].magnitude / sweep[0].magnitude);
    }
    std::ostringstream det;
    det << "raw magnitude ratio " << worst_raw;
    s.add("saturating_excitation_plateau", worst, 1.05, det.str());

    const SystemConfig duff = system_for(StiffeningDuffing{1.0}, 5);
    const auto sweep = apriori_sweep(duff, 3, {10.0, 100.0}, 1.0 / 3.0);
    s.add("duffing_cubic_growth", 8.0 - sweep[1].magnitude / sweep[0].magnitude, 0.0);
}

void check_unilateral_scaling(Suite& s) {
    const SystemConfig sys = SystemConfig::make(1.0, 0.01, 0.75, UnilateralSpring{0.5}, 5, 1024);
    VprnmOptions opts;
    double worst = 0.0;
    for (double F : {0.4, 1.0}) {
        const auto p1 = vprnm_backbone(sys, 2, F, F, opts);
        const auto p2 = vprnm_backbone(sys, 2, 2.0 * F, 2.0 * F, opts);
        if (p1.empty() || p2.empty()) {
            s.add_bool("unilateral_proportional_scaling", false, "point solve failed");
            return;
        }
        worst = std::max(worst,
                         (2.0 * p1.front().X - p2.front().X).norm() / (2.0 * p1.front().X.norm()));
    }
    s.add("unilateral_proportional_scaling", worst, 1e-6);
}

}  // namespace

std::vector<CheckResult> run_validation_suite(const std::function<void(const CheckResult&)>& cb) {
    Suite s;
    s.on_result = cb;
    check_round_trip(s);
    check_conservative_work(s);
    check_oddness(s);
    check_oddness_propagation(s);
    check_saturation(s);
    check_masing_closure(s);
    check_iwan_backbone(s);
    check_aft_jacobians(s);
    check_fast_aft(s);
    check_decomposition(s);
    check_linear_limit(s);
    check_hbm_residual_fd(s);
    check_continuation_basics(s);
    check_step_size_convergence(s);
    check_vprnm_contracts(s);
    check_peak_refinement(s);
    check_saturating_excitation(s);
    check_unilateral_scaling(s);
    return s.results;
}

bool all_passed(const std::vector<CheckResult>& results) {
    for (const auto& r : results)
        if (!r.pass) return false;
    return true;
}

}  // namespace vibratrak
