#include "vibratrak/aft.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <sstream>

#include "vibratrak/errors.hpp"

namespace vibratrak {

namespace {

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Cached trigonometric tables for one (H, Nt) combination.
struct FourierBasis {
    int H = 0;
    int Nt = 0;
    RowMatrixXd synth;        // Nt x (2H+1): x = synth * X
    RowMatrixXd dsynth;       // Nt x (2H+1): v = omega * dsynth * X
    Eigen::MatrixXd analysis; // (2H+1) x Nt

    FourierBasis(int H_, int Nt_) : H(H_), Nt(Nt_) {
        synth.setZero(Nt, 2 * H + 1);
        dsynth.setZero(Nt, 2 * H + 1);
        analysis.setZero(2 * H + 1, Nt);
        for (int j = 0; j < Nt; ++j) {
            synth(j, 0) = 1.0;
            analysis(0, j) = 1.0 / Nt;
            for (int k = 1; k <= H; ++k) {
                const double th = 2.0 * M_PI * static_cast<double>(j) * k / Nt;
                const double ck = std::cos(th), sk = std::sin(th);
                synth(j, idx_cos(k)) = ck;
                synth(j, idx_sin(k)) = sk;
                dsynth(j, idx_cos(k)) = -k * sk;
                dsynth(j, idx_sin(k)) = k * ck;
                analysis(idx_cos(k), j) = 2.0 * ck / Nt;
                analysis(idx_sin(k), j) = 2.0 * sk / Nt;
            }
        }
    }
};

std::shared_ptr<const FourierBasis> basis_for(int H, int Nt) {
    static std::mutex mtx;
    static std::map<std::pair<int, int>, std::shared_ptr<const FourierBasis>> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto& entry = cache[{H, Nt}];
    if (!entry) entry = std::make_shared<const FourierBasis>(H, Nt);
    return entry;
}

void check_finite(const Eigen::VectorXd& samples, const char* what) {
    for (Eigen::Index j = 0; j < samples.size(); ++j) {
        if (!std::isfinite(samples[j])) {
            std::ostringstream msg;
            msg << "aft: non-finite " << what << " sample at index " << j;
            throw SolverError(msg.str());
        }
    }
}

// -- smooth (history-free) path ---------------------------------------------

template <typename Model>
inline void sample_kernel(const Model& mdl, double x, double v, double& f, double& fx, double& fv);

template <>
inline void sample_kernel(const StiffeningDuffing& m, double x, double, double& f, double& fx,
                          double& fv) {
    f = m.alpha * x * x * x;
    fx = 3.0 * m.alpha * x * x;
    fv = 0.0;
}
template <>
inline void sample_kernel(const QuinticStiffness& m, double x, double, double& f, double& fx,
                          double& fv) {
    const double x2 = x * x;
    f = m.eta * x2 * x2 * x;
    fx = 5.0 * m.eta * x2 * x2;
    fv = 0.0;
}
template <>
inline void sample_kernel(const SofteningDuffing& m, double x, double, double& f, double& fx,
                          double& fv) {
    f = m.alpha * x * x * x;
    fx = 3.0 * m.alpha * x * x;
    fv = 0.0;
}
template <>
inline void sample_kernel(const UnilateralSpring& m, double x, double, double& f, double& fx,
                          double& fv) {
    f = x > 0.0 ? m.k_nl * x : 0.0;
    fx = x >= 0.0 ? m.k_nl : 0.0;
    fv = 0.0;
}
template <>
inline void sample_kernel(const CubicDamping& m, double, double v, double& f, double& fx,
                          double& fv) {
    f = m.gamma * v * v * v;
    fx = 0.0;
    fv = 3.0 * m.gamma * v * v;
}

struct SofteningIIKernel {
    double k_t, F_s, pm, coef, chi;
    explicit SofteningIIKernel(const SofteningII& s)
        : k_t(s.k_t), F_s(s.F_s), pm(phi_max(s.F_s, s.k_t, s.chi, s.beta)), chi(s.chi) {
        const double denom = s.beta + (s.chi + 1.0) / (s.chi + 2.0);
        coef = std::pow(s.k_t * denom / (s.F_s * (1.0 + s.beta)), 1.0 + s.chi) * s.k_t /
               ((1.0 + s.beta) * (s.chi + 2.0));
    }
    void operator()(double x, double& f, double& fx) const {
        const double ax = std::abs(x);
        if (ax >= pm) {
            f = x > 0.0 ? F_s : -F_s;
            fx = 0.0;
        } else {
            const double s = (x > 0.0) - (x < 0.0);
            f = k_t * x - coef * std::pow(ax, chi + 2.0) * s;
            fx = k_t - coef * (chi + 2.0) * std::pow(ax, chi + 1.0);
        }
    }
};

void smooth_series(const ForceModel& force, const Eigen::VectorXd& x, const Eigen::VectorXd& v,
                   Eigen::VectorXd& f, Eigen::VectorXd& fx, Eigen::VectorXd& fv) {
    const auto n = x.size();
    f.resize(n);
    fx.resize(n);
    fv.resize(n);
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Jenkins> || std::is_same_v<T, Iwan>) {
                throw std::invalid_argument("smooth_series: hysteretic model");
            } else if constexpr (std::is_same_v<T, SofteningII>) {
                SofteningIIKernel kern(m);
                for (Eigen::Index j = 0; j < n; ++j) {
                    kern(x[j], f[j], fx[j]);
                    fv[j] = 0.0;
                }
            } else {
                for (Eigen::Index j = 0; j < n; ++j) sample_kernel(m, x[j], v[j], f[j], fx[j], fv[j]);
            }
        },
        force);
}

// -- hysteretic machinery ----------------------------------------------------

/// Parallel stick-slip sliders in displacement units; the Jenkins element is
/// the single-slider case with phi = F_s/k_t and weight k_t.
struct SliderBank {
    Eigen::ArrayXd phi;
    Eigen::ArrayXd w;
};

SliderBank make_slider_bank(const ForceModel& force) {
    SliderBank bank;
    if (const auto* j = std::get_if<Jenkins>(&force)) {
        bank.phi.resize(1);
        bank.w.resize(1);
        bank.phi[0] = j->F_s / j->k_t;
        bank.w[0] = j->k_t;
        return bank;
    }
    const auto& iw = std::get<Iwan>(force);
    const double pm = phi_max(iw.F_s, iw.k_t, iw.chi, iw.beta);
    const double denom = iw.beta + (iw.chi + 1.0) / (iw.chi + 2.0);
    const double rho_coef = iw.F_s * (iw.chi + 1.0) / (std::pow(pm, iw.chi + 2.0) * denom);
    const double dphi = pm / iw.n_sliders;
    const int ns = iw.n_sliders + 1;  // midpoint sliders plus the Dirac slider
    bank.phi.resize(ns);
    bank.w.resize(ns);
    for (int i = 0; i < iw.n_sliders; ++i) {
        bank.phi[i] = (i + 0.5) * dphi;
        bank.w[i] = rho_coef * std::pow(bank.phi[i], iw.chi) * dphi;
    }
    bank.phi[ns - 1] = pm;
    bank.w[ns - 1] = iw.F_s * iw.beta / (pm * denom);
    return bank;
}

/// Slider values at the first sample with every slider anchored at zero
/// displacement: g_i = clamp(x[0], +-phi_i). Makes a fully stuck element an
/// exact linear spring (no spurious static offset); any slipping history is
/// erased by the two pre-cycles anyway.
void centered_initial_state(const SliderBank& bank, double x0, const Eigen::RowVectorXd& row0,
                            bool jacobian, Eigen::ArrayXd& g, RowMatrixXd& Dg) {
    const int ns = static_cast<int>(bank.phi.size());
    g.resize(ns);
    if (jacobian) Dg.setZero(ns, row0.cols());
    for (int i = 0; i < ns; ++i) {
        if (std::abs(x0) < bank.phi[i]) {
            g[i] = x0;
            if (jacobian) Dg.row(i) = row0;
        } else {
            g[i] = std::copysign(bank.phi[i], x0);
        }
    }
}

/// Sequential two-pass evaluation; the second pass is the steady-state loop.
void hysteretic_series_standard(const SliderBank& bank, const Eigen::VectorXd& x,
                                const RowMatrixXd& synth, bool jacobian, Eigen::VectorXd& f,
                                RowMatrixXd* D, AftStats* stats) {
    const int Nt = static_cast<int>(x.size());
    const int ns = static_cast<int>(bank.phi.size());
    const int nc = static_cast<int>(synth.cols());

    Eigen::ArrayXd g;
    RowMatrixXd Dg;
    Eigen::RowVectorXd rdelta(nc);
    centered_initial_state(bank, x[0], synth.row(0), jacobian, g, Dg);

    f.resize(Nt);
    if (jacobian) D->setZero(Nt, nc);

    double x_prev = x[0];
    int j_prev = 0;
    for (int pass = 0; pass < 2; ++pass) {
        for (int j = 0; j < Nt; ++j) {
            const double dxj = x[j] - x_prev;
            if (jacobian) rdelta = synth.row(j) - synth.row(j_prev);
            for (int i = 0; i < ns; ++i) {
                const double raw = g[i] + dxj;
                if (std::abs(raw) < bank.phi[i]) {
                    g[i] = raw;
                    if (jacobian) Dg.row(i) += rdelta;
                } else {
                    g[i] = std::copysign(bank.phi[i], raw);
                    if (jacobian) Dg.row(i).setZero();
                }
            }
            x_prev = x[j];
            j_prev = j;
            if (pass == 1) {
                f[j] = (bank.w * g).sum();
                if (jacobian) D->row(j) = bank.w.matrix().transpose() * Dg;
            }
        }
    }
    if (stats) {
        stats->element_evals += 2 * Nt;
        stats->critical_path_evals += 2 * Nt;
    }
}

/// Anchored slider state used by the fast path.
struct AnchorState {
    int sample = 0;            // anchor sample index
    Eigen::ArrayXd g;          // slider values at the anchor
    RowMatrixXd Dg;            // d g / d X, one row per slider (jacobian mode)
};

/// One element evaluation moving the anchored state to sample j.
void step_state(const SliderBank& bank, const Eigen::VectorXd& x, const RowMatrixXd& synth,
                bool jacobian, AnchorState& s, int j) {
    const double dx = x[j] - x[s.sample];
    Eigen::RowVectorXd rdelta;
    if (jacobian) rdelta = synth.row(j) - synth.row(s.sample);
    for (int i = 0; i < bank.phi.size(); ++i) {
        const double raw = s.g[i] + dx;
        if (std::abs(raw) < bank.phi[i]) {
            s.g[i] = raw;
            if (jacobian) s.Dg.row(i) += rdelta;
        } else {
            s.g[i] = std::copysign(bank.phi[i], raw);
            if (jacobian) s.Dg.row(i).setZero();
        }
    }
    s.sample = j;
}

/// Evaluate all samples of one monotone segment in a single sweep.
///
/// Relative to the anchor, slider i carries the constant c_i = g_i - x_a so
/// its one-step value is clamp(x_j + c_i, +-phi_i). Along a monotone segment
/// sliders can only leave the stuck set (crossing phi_i - c_i going up, or
/// -phi_i - c_i going down), so sorting those thresholds turns the whole
/// segment into an O(samples + sliders log sliders) sweep with running sums
///   f_j = S_w x_j + S_wc + S_sat,   df_j/dX = S_w synth_j + V.
struct SegmentSweep {
    const SliderBank& bank;
    const Eigen::VectorXd& x;
    const RowMatrixXd& synth;
    bool jacobian;

    Eigen::ArrayXd c;
    RowMatrixXd G;  // per-slider derivative of c (jacobian mode)
    std::vector<int> order;
    Eigen::ArrayXd thresh;
    double dir = 1.0;
    double S_w = 0.0, S_wc = 0.0, S_sat = 0.0;
    Eigen::RowVectorXd V;
    size_t next_event = 0;

    SegmentSweep(const SliderBank& bank_, const Eigen::VectorXd& x_, const RowMatrixXd& synth_,
                 bool jac, const AnchorState& s, double direction)
        : bank(bank_), x(x_), synth(synth_), jacobian(jac), dir(direction) {
        const int ns = static_cast<int>(bank.phi.size());
        c = s.g - x[s.sample];
        if (jacobian) G = s.Dg.rowwise() - synth.row(s.sample);
        thresh.resize(ns);
        for (int i = 0; i < ns; ++i)
            thresh[i] = dir > 0 ? bank.phi[i] - c[i] : -bank.phi[i] - c[i];
        order.resize(ns);
        std::iota(order.begin(), order.end(), 0);
        if (dir > 0)
            std::sort(order.begin(), order.end(), [&](int a, int b) { return thresh[a] < thresh[b]; });
        else
            std::sort(order.begin(), order.end(), [&](int a, int b) { return thresh[a] > thresh[b]; });
        S_w = bank.w.sum();
        S_wc = (bank.w * c).sum();
        if (jacobian) V = bank.w.matrix().transpose() * G;
    }

    void emit(int j, Eigen::VectorXd& f, RowMatrixXd* D) {
        while (next_event < order.size()) {
            const int i = order[next_event];
            const bool crossed = dir > 0 ? x[j] >= thresh[i] : x[j] <= thresh[i];
            if (!crossed) break;
            S_w -= bank.w[i];
            S_wc -= bank.w[i] * c[i];
            S_sat += dir * bank.w[i] * bank.phi[i];
            if (jacobian) V -= bank.w[i] * G.row(i);
            ++next_event;
        }
        f[j] = S_w * x[j] + S_wc + S_sat;
        if (jacobian) D->row(j) = S_w * synth.row(j) + V;
    }
};

/// Returns false when the series is degenerate for the sweep (flat samples or
/// no reversals); the caller then uses the standard path.
bool hysteretic_series_fast(const SliderBank& bank, const Eigen::VectorXd& x,
                            const RowMatrixXd& synth, bool jacobian, Eigen::VectorXd& f,
                            RowMatrixXd* D, AftStats* stats) {
    const int Nt = static_cast<int>(x.size());
    for (int j = 0; j < Nt; ++j)
        if (x[(j + 1) % Nt] == x[j]) return false;

    const std::vector<int> crit = find_critical_instants(x);
    const int R = static_cast<int>(crit.size());
    if (R == 0) return false;

    const int nc = static_cast<int>(synth.cols());
    auto seg_dir = [&](int anchor) {
        return x[(anchor + 1) % Nt] > x[anchor] ? 1.0 : -1.0;
    };

    AnchorState s;
    s.sample = 0;
    centered_initial_state(bank, x[0], synth.row(0), jacobian, s.g, s.Dg);

    // Two repeats over the ordered reversal points; keep the end-of-first-pass
    // state (it anchors the samples before the first reversal) and the states
    // of the second pass.
    for (int r = 0; r < R; ++r) step_state(bank, x, synth, jacobian, s, crit[r]);
    AnchorState state_pass1_end = s;
    std::vector<AnchorState> state2(R);
    for (int r = 0; r < R; ++r) {
        step_state(bank, x, synth, jacobian, s, crit[r]);
        state2[r] = s;
    }

    f.resize(Nt);
    if (jacobian) D->setZero(Nt, nc);

    // Head of the cycle: continues the monotone run that ends the first pass.
    {
        SegmentSweep sweep(bank, x, synth, jacobian, state_pass1_end, seg_dir(crit[R - 1]));
        for (int j = 0; j <= crit[0]; ++j) sweep.emit(j, f, D);
    }
    for (int r = 0; r + 1 < R; ++r) {
        SegmentSweep sweep(bank, x, synth, jacobian, state2[r], seg_dir(crit[r]));
        for (int j = crit[r] + 1; j <= crit[r + 1]; ++j) sweep.emit(j, f, D);
    }
    if (crit[R - 1] + 1 < Nt) {
        SegmentSweep sweep(bank, x, synth, jacobian, state2[R - 1], seg_dir(crit[R - 1]));
        for (int j = crit[R - 1] + 1; j < Nt; ++j) sweep.emit(j, f, D);
    }

    if (stats) {
        stats->reversal_count = R;
        stats->element_evals += 2 * R + Nt;
        stats->critical_path_evals += 2 * R + 1;
    }
    return true;
}

AftResult aft_hysteretic(const ForceModel& force, const HarmonicVector& X, int Nt, bool jacobian,
                         bool fast, AftStats* stats) {
    const int H = num_harmonics(X);
    auto basis = basis_for(H, Nt);
    Eigen::VectorXd x = basis->synth * X;
    check_finite(x, "displacement");

    const SliderBank bank = make_slider_bank(force);
    Eigen::VectorXd f;
    RowMatrixXd D;
    bool done = false;
    if (fast) {
        done = hysteretic_series_fast(bank, x, basis->synth, jacobian, f, &D, stats);
        if (!done && stats) stats->fell_back_to_standard = true;
    }
    if (!done) hysteretic_series_standard(bank, x, basis->synth, jacobian, f, &D, stats);

    AftResult out;
    out.F = basis->analysis * f;
    if (jacobian) out.dF_dX = basis->analysis * D;
    out.dF_domega = Eigen::VectorXd::Zero(2 * H + 1);
    return out;
}

}  // namespace

TimeSeries synthesize_time_series(const HarmonicVector& X, double omega, int Nt) {
    const int H = num_harmonics(X);
    if (Nt < 4 * H) throw std::invalid_argument("synthesize_time_series: Nt < 4H");
    auto basis = basis_for(H, Nt);
    TimeSeries ts;
    ts.x = basis->synth * X;
    ts.v = omega * (basis->dsynth * X);
    return ts;
}

HarmonicVector harmonic_coefficients(const Eigen::VectorXd& f_samples, int H) {
    if (H < 0 || f_samples.size() < 1)
        throw std::invalid_argument("harmonic_coefficients: bad arguments");
    auto basis = basis_for(H, static_cast<int>(f_samples.size()));
    return basis->analysis * f_samples;
}

std::vector<int> find_critical_instants(const Eigen::VectorXd& x) {
    const int Nt = static_cast<int>(x.size());
    std::vector<int> crit;
    auto sgn = [](double d) { return (d > 0.0) - (d < 0.0); };
    for (int j = 0; j < Nt; ++j) {
        const double fwd = x[(j + 1) % Nt] - x[j];
        const double bwd = x[j] - x[(j + Nt - 1) % Nt];
        if (sgn(fwd) != sgn(bwd)) crit.push_back(j);
    }
    return crit;
}

AftResult aft(const ForceModel& force, const HarmonicVector& X, double omega, int Nt,
              bool jacobian, AftStats* stats) {
    const int H = num_harmonics(X);
    if (Nt < 4 * H) throw std::invalid_argument("aft: Nt < 4H");
    if (is_hysteretic(force)) return aft_hysteretic(force, X, Nt, jacobian, /*fast=*/false, stats);

    auto basis = basis_for(H, Nt);
    Eigen::VectorXd x = basis->synth * X;
    Eigen::VectorXd v_over_omega = basis->dsynth * X;
    Eigen::VectorXd v = omega * v_over_omega;
    check_finite(x, "displacement");
    check_finite(v, "velocity");

    Eigen::VectorXd f, fx, fv;
    smooth_series(force, x, v, f, fx, fv);
    check_finite(f, "force");

    AftResult out;
    out.F = basis->analysis * f;
    if (jacobian) {
        RowMatrixXd D = basis->synth.array().colwise() * fx.array();
        D += (basis->dsynth.array().colwise() * (omega * fv.array())).matrix();
        out.dF_dX = basis->analysis * D;
    }
    out.dF_domega = basis->analysis * (fv.array() * v_over_omega.array()).matrix();
    return out;
}

AftResult aft_fast_hysteretic(const ForceModel& force, const HarmonicVector& X, double omega,
                              int Nt, bool jacobian, AftStats* stats) {
    (void)omega;  // hysteresis is rate independent
    if (!is_hysteretic(force))
        throw std::invalid_argument("aft_fast_hysteretic: requires Jenkins or Iwan");
    if (Nt < 4 * num_harmonics(X)) throw std::invalid_argument("aft_fast_hysteretic: Nt < 4H");
    return aft_hysteretic(force, X, Nt, jacobian, /*fast=*/true, stats);
}

}  // namespace vibratrak
